#include "boolution/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "boolution/kernels.hpp"

namespace boolution {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void stamp(ScenarioReport& report, const std::string& scenario,
           const std::string& hash, Clock::time_point start) {
    report.scenario = scenario;
    report.config_hash = hash;
    report.version = kVersion;
    report.kernel_backend = kern::backend_name(kern::active_backend());
    report.wall_seconds = seconds_since(start);
}

void push_assert(ScenarioReport& report, const std::string& name, bool pass,
                 double value, double bound) {
    report.assertions.push_back({name, pass, value, bound});
}

// Self-description of a run for hashing when no config file is involved.
std::string describe(const BooleanFitnessFunction& f, const std::string& extra) {
    return function_to_json(f) + "\n" + extra;
}

}  // namespace

int thread_count() {
    if (const char* env = std::getenv("BOOLUTION_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void write_report_csv(std::ostream& out, const ScenarioReport& report) {
    // wall time is deliberately absent: identical (config, seed, version)
    // must produce byte-identical report files
    CsvWriter csv(out);
    csv.header({"section", "name", "value", "bound", "pass"});
    csv.row({"meta", "scenario", report.scenario, "", ""});
    csv.row({"meta", "version", report.version, "", ""});
    csv.row({"meta", "kernel", report.kernel_backend, "", ""});
    csv.row({"meta", "config_hash", report.config_hash, "", ""});
    for (const auto& [name, value] : report.stats)
        csv.row({"stat", name, value, "", ""});
    for (const auto& a : report.assertions)
        csv.row({"assert", a.name, format_double(a.value),
                 format_double(a.bound), a.pass ? "1" : "0"});
    if (!report.table_header.empty()) {
        csv.row({});
        csv.header(report.table_header);
        for (const auto& r : report.table_rows) csv.row(r);
    }
}

std::string report_to_json(const ScenarioReport& report) {
    json obj;
    obj["scenario"] = report.scenario;
    obj["version"] = report.version;
    obj["kernel"] = report.kernel_backend;
    obj["config_hash"] = report.config_hash;
    json stats = json::object();
    for (const auto& [name, value] : report.stats) stats[name] = value;
    obj["stats"] = stats;
    obj["assertions"] = json::array();
    for (const auto& a : report.assertions) {
        obj["assertions"].push_back({{"name", a.name},
                                     {"pass", a.pass},
                                     {"value", a.value},
                                     {"bound", a.bound}});
    }
    if (!report.table_header.empty()) {
        obj["table"] = {{"header", report.table_header},
                        {"rows", report.table_rows}};
    }
    return obj.dump(2);
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

ScenarioReport scenario_fixation(const BooleanFitnessFunction& f,
                                 const ProductPoint& mu0, int sample_size,
                                 long steps, const SeedRange& seeds) {
    const auto start = Clock::now();
    if (!f.landscape().is_weak())
        throw_precondition("fixation scenario requires weak selection");
    const double eps = f.landscape().epsilon();
    const double ne = f.n() * eps;
    if (ne >= 1.0)
        throw_precondition("fixation scenario requires n*eps < 1");

    const double ext0 = extension(f, mu0);
    const double beta_thm = std::sqrt(eps / (sample_size * (1.0 - ne)));
    const double alpha_thm =
        std::sqrt(2.0 * beta_thm * std::log(2.0 / beta_thm));
    const double top = f.landscape().satisfied_value();
    const double ne_floor = 1.0 - ne;

    auto outcomes = map_seeds<SeedOutcome>(seeds, [&](std::uint64_t seed) {
        SeedOutcome o;
        RunOptions opt;
        opt.record_every = 0;
        opt.verify = false;
        long violations = 0;
        opt.observer = [&](const StepRecord& rec) {
            if (rec.selection_increment <
                ne_floor * rec.linear_mass - 1e-9)
                ++violations;
        };
        const Trajectory traj =
            run_finite(f, mu0, sample_size, steps, seed, opt);
        o.fixed = traj.fixed;
        o.fixation_time = traj.fixation_time;
        o.extinct = traj.extinct;
        o.terminal_extension = extension(f, ProductPoint(traj.terminal_mu));
        o.satisfied = std::abs(o.terminal_extension - top) < 1e-12;
        o.density_violations = violations;
        return o;
    });

    long fixed = 0, satisfied = 0, top_hits = 0, violations = 0;
    double sum_ext = 0.0, sum_fix_time = 0.0;
    for (const auto& o : outcomes) {
        fixed += o.fixed;
        top_hits += o.satisfied;
        if (o.fixed) {
            satisfied += o.satisfied;
            sum_fix_time += static_cast<double>(o.fixation_time);
        }
        sum_ext += o.terminal_extension;
        violations += o.density_violations;
    }
    const double n_seeds = static_cast<double>(outcomes.size());

    ScenarioReport report;
    report.stat("seeds", n_seeds);
    report.stat("N", static_cast<double>(sample_size));
    report.stat("T", static_cast<double>(steps));
    report.stat("fixed_fraction", fixed / n_seeds);
    report.stat("satisfied_fraction_of_fixed",
                fixed ? satisfied / static_cast<double>(fixed) : 0.0);
    report.stat("pr_extension_top", top_hits / n_seeds);
    report.stat("mean_terminal_extension", sum_ext / n_seeds);
    report.stat("mean_fixation_time",
                fixed ? sum_fix_time / static_cast<double>(fixed) : -1.0);
    report.stat("initial_extension", ext0);
    report.stat("beta_theorem", beta_thm);
    report.stat("initial_condition_met",
                ext0 > 1.0 + alpha_thm ? "1" : "0");
    report.stat("density_violations", static_cast<double>(violations));
    push_assert(report, "density_gap_nonnegative_every_step", violations == 0,
                static_cast<double>(violations), 0.0);
    stamp(report, "fixation",
          config_hash(describe(f, "fixation N=" + std::to_string(sample_size) +
                                      " T=" + std::to_string(steps))),
          start);
    return report;
}

ScenarioReport scenario_monotone_bound(const BooleanFitnessFunction& f,
                                       const ProductPoint& mu0, long steps) {
    const auto start = Clock::now();
    if (!f.landscape().is_weak())
        throw_precondition("monotone bound requires weak selection");
    if (!is_monotone(f))
        throw_argument("monotone bound scenario rejects non-monotone input");

    const double eps = f.landscape().epsilon();
    const double sat0 = satisfaction_probability(f, mu0);
    if (sat0 <= 0.0)
        throw_precondition("monotone bound needs mu0(f) > 0");
    const double scale = f.n() * (1.0 + eps) / (eps * sat0);

    long violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    double min_ratio = std::numeric_limits<double>::infinity();
    auto probe = [&](long t, double sat) {
        if (t == 0) return;  // bound is vacuous at t = 0
        const double bound = 1.0 - scale / static_cast<double>(t);
        min_slack = std::min(min_slack, sat - bound);
        if (bound > 0.0) min_ratio = std::min(min_ratio, sat / bound);
        if (sat < bound) ++violations;
    };
    RunOptions opt;
    opt.record_every = 0;
    opt.early_stop = false;
    opt.observer = [&](const StepRecord& rec) { probe(rec.t, rec.sat_prob); };
    const Trajectory traj = run_infinite(f, mu0, steps, opt);

    // terminal state = mu^T
    const double final_sat =
        satisfaction_probability(f, ProductPoint(traj.terminal_mu));
    probe(steps, final_sat);

    ScenarioReport report;
    report.stat("T", static_cast<double>(steps));
    report.stat("initial_sat", sat0);
    report.stat("final_sat", final_sat);
    report.stat("min_slack", min_slack);
    report.stat("tightest_ratio", min_ratio);
    report.stat("bound_violations", static_cast<double>(violations));
    push_assert(report, "theorem_bound_every_step", violations == 0,
                static_cast<double>(violations), 0.0);
    stamp(report, "monotone",
          config_hash(describe(f, "monotone T=" + std::to_string(steps))),
          start);
    return report;
}

ScenarioReport scenario_waddington(int n, int k,
                                   const FitnessLandscape& landscape,
                                   const WaddingtonMode& mode,
                                   int heat_generations,
                                   int post_generations) {
    const auto start = Clock::now();
    std::vector<int> schedule;
    schedule.insert(schedule.end(), static_cast<std::size_t>(heat_generations),
                    1);
    schedule.insert(schedule.end(), static_cast<std::size_t>(post_generations),
                    -1);
    const auto report_rows = waddington_scenario(
        n, k, schedule, landscape, mode, ProductPoint::uniform(n));

    ScenarioReport report;
    report.table_header = {"t", "h", "sat_heat", "sat_normal", "mean_mu",
                           "extinct"};
    for (const auto& g : report_rows) {
        report.table_rows.push_back(
            {std::to_string(g.t), std::to_string(g.h),
             format_double(g.sat_heat), format_double(g.sat_normal),
             format_double(g.mean_mu), g.extinct ? "1" : "0"});
    }

    const bool extinct = report_rows.back().extinct;
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    auto heat_at = [&](std::size_t t) {
        return t < report_rows.size() ? report_rows[t].sat_heat : nan;
    };
    auto normal_at = [&](std::size_t t) {
        return t < report_rows.size() ? report_rows[t].sat_normal : nan;
    };
    const std::size_t g1 = static_cast<std::size_t>(heat_generations);

    // Genetic-assimilation claims, evaluated on the canonical schedule:
    // rare under normal environment, triggered by heat, amplified by one
    // selection, nearly fixed after the heat phase, persistent after the
    // switch back.
    push_assert(report, "a_rare_at_start", normal_at(0) < 0.01, normal_at(0),
                0.01);
    push_assert(report, "b_heat_triggers",
                heat_at(0) > normal_at(0), heat_at(0), normal_at(0));
    push_assert(report, "c_jump_after_first_selection", heat_at(1) > 0.5,
                heat_at(1), 0.5);
    bool monotone_rise = !extinct && report_rows.size() > g1;
    for (std::size_t t = 0; t + 1 <= g1 && monotone_rise; ++t) {
        if (!(heat_at(t + 1) >= heat_at(t) - 1e-12)) monotone_rise = false;
    }
    push_assert(report, "d_monotone_amplification", monotone_rise,
                monotone_rise ? 1.0 : 0.0, 1.0);
    push_assert(report, "d_near_fixation_after_heat", heat_at(g1) > 0.95,
                heat_at(g1), 0.95);
    push_assert(report, "e_persistence_after_switch", normal_at(g1) > 0.5,
                normal_at(g1), 0.5);

    report.stat("generations", static_cast<double>(report_rows.size() - 1));
    report.stat("extinct", extinct ? "1" : "0");
    report.stat("final_sat_normal", report_rows.back().sat_normal);
    stamp(report, "waddington",
          config_hash("waddington n=" + std::to_string(n) +
                      " k=" + std::to_string(k) +
                      " heat=" + std::to_string(heat_generations) +
                      " post=" + std::to_string(post_generations)),
          start);
    return report;
}

ScenarioReport scenario_linkage(const BooleanFitnessFunction& f,
                                const GenotypeDistribution& p0, long steps,
                                bool selection_on) {
    const auto start = Clock::now();
    const auto series = recombination_dynamics(f, p0, steps, selection_on);

    ScenarioReport report;
    report.table_header = {"t", "ld"};
    for (std::size_t t = 0; t < series.size(); ++t)
        report.table_rows.push_back(
            {std::to_string(t),
             format_double(series[t].linkage_disequilibrium)});

    long first_below = -1;
    if (f.landscape().is_weak()) {
        const double target = 10.0 * f.landscape().epsilon();
        for (std::size_t t = 0; t < series.size(); ++t) {
            if (series[t].linkage_disequilibrium < target) {
                first_below = static_cast<long>(t);
                break;
            }
        }
        report.stat("ld_target_10eps", target);
        report.stat("first_generation_below_10eps",
                    static_cast<double>(first_below));
    }
    report.stat("ld_initial", series.front().linkage_disequilibrium);
    report.stat("ld_final", series.back().linkage_disequilibrium);

    // Marginal preservation is exact when selection is off.
    if (!selection_on) {
        double worst = 0.0;
        for (int i = 0; i < p0.n(); ++i) {
            const double m0 = p0.marginal_mean(i);
            for (const auto& sp : series)
                worst = std::max(
                    worst, std::abs(sp.distribution.marginal_mean(i) - m0));
        }
        push_assert(report, "marginals_preserved", worst <= 1e-12, worst,
                    1e-12);
    }
    stamp(report, "ld",
          config_hash(describe(f, "ld T=" + std::to_string(steps) +
                                      " sel=" +
                                      (selection_on ? "on" : "off"))),
          start);
    return report;
}

// ---------------------------------------------------------------------------
// Config file handling
// ---------------------------------------------------------------------------

namespace {

ExperimentConfig parse_checked_config(const json& obj,
                                      const std::string& text) {
    const std::set<std::string> known = {
        "scenario", "function", "n",  "N",           "T",
        "seeds",    "mu0",      "k",  "heat_generations",
        "post_generations",     "selection",        "p0",
        "record_every",         "early_stop",       "out"};
    for (const auto& item : obj.items())
        if (!known.count(item.key()))
            throw_config("unknown key '" + item.key() + "' in config");

    ExperimentConfig cfg;
    cfg.canonical_text = text;
    if (!obj.contains("scenario") || !obj["scenario"].is_string())
        throw_config("config needs a 'scenario' string");
    cfg.scenario = obj["scenario"].get<std::string>();

    if (obj.contains("function")) {
        if (obj["function"].is_string()) {
            cfg.function =
                load_function_file(obj["function"].get<std::string>());
        } else {
            cfg.function = parse_function_json(obj["function"].dump());
        }
        cfg.n = cfg.function->n();
    }
    if (obj.contains("n")) {
        const int n = obj["n"].get<int>();
        if (cfg.function && n != cfg.n)
            throw_config("'n' disagrees with the function definition");
        cfg.n = n;
    }
    if (obj.contains("N")) cfg.sample_size = obj["N"].get<int>();
    if (obj.contains("T")) cfg.steps = obj["T"].get<long>();
    if (obj.contains("seeds")) {
        if (obj["seeds"].is_number_integer()) {
            const auto s = obj["seeds"].get<std::uint64_t>();
            cfg.seeds = {s, s};
        } else {
            cfg.seeds = parse_seed_range(obj["seeds"].get<std::string>());
        }
    }
    cfg.seeds = apply_seed_env(cfg.seeds);
    if (obj.contains("mu0")) {
        if (obj["mu0"].is_array()) {
            std::string joined;
            for (const auto& v : obj["mu0"]) {
                if (!joined.empty()) joined += ',';
                joined += format_double(v.get<double>());
            }
            cfg.mu0_spec = joined;
        } else {
            cfg.mu0_spec = obj["mu0"].get<std::string>();
        }
    }
    if (obj.contains("k")) cfg.waddington_k = obj["k"].get<int>();
    if (obj.contains("heat_generations"))
        cfg.heat_generations = obj["heat_generations"].get<int>();
    if (obj.contains("post_generations"))
        cfg.post_generations = obj["post_generations"].get<int>();
    if (obj.contains("selection"))
        cfg.ld_selection = obj["selection"].get<bool>();
    if (obj.contains("p0")) {
        if (obj["p0"].is_array()) {
            for (const auto& v : obj["p0"])
                cfg.ld_p0.push_back(v.get<double>());
        } else if (obj["p0"].get<std::string>() != "correlated") {
            throw_config("p0 must be an array or 'correlated'");
        }
    }
    if (obj.contains("record_every"))
        cfg.record_every = obj["record_every"].get<int>();
    if (obj.contains("early_stop"))
        cfg.early_stop = obj["early_stop"].get<bool>();
    if (obj.contains("out")) cfg.out_path = obj["out"].get<std::string>();
    return cfg;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::exception& e) {
        throw_config(std::string("config is not valid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw_config("config must hold a JSON object");
    try {
        return parse_checked_config(obj, text);
    } catch (const json::exception& e) {
        throw_config(std::string("bad config field: ") + e.what());
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_config("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

namespace {

GenotypeDistribution ld_start(const ExperimentConfig& cfg) {
    if (!cfg.ld_p0.empty()) return GenotypeDistribution(cfg.ld_p0);
    // default "correlated" start: all-(+1) and all-(-1) in equal shares
    if (cfg.n < 1) throw_config("ld scenario needs n");
    std::vector<double> p(std::size_t(1) << cfg.n, 0.0);
    p.front() = 0.5;
    p.back() = 0.5;
    return GenotypeDistribution(std::move(p));
}

}  // namespace

ScenarioReport run_scenario(const ExperimentConfig& cfg) {
    ScenarioReport report;
    if (cfg.scenario == "fixation") {
        if (!cfg.function) throw_config("fixation scenario needs a function");
        report = scenario_fixation(*cfg.function,
                                   parse_mu0(cfg.mu0_spec, cfg.n),
                                   cfg.sample_size, cfg.steps, cfg.seeds);
    } else if (cfg.scenario == "monotone") {
        if (!cfg.function) throw_config("monotone scenario needs a function");
        report = scenario_monotone_bound(
            *cfg.function, parse_mu0(cfg.mu0_spec, cfg.n), cfg.steps);
    } else if (cfg.scenario == "waddington") {
        const FitnessLandscape land = cfg.function
                                          ? cfg.function->landscape()
                                          : FitnessLandscape::lethal();
        const WaddingtonMode mode =
            cfg.sample_size > 0
                ? WaddingtonMode::finite_population(cfg.sample_size,
                                                    cfg.seeds.from)
                : WaddingtonMode::infinite();
        report = scenario_waddington(cfg.n, cfg.waddington_k, land, mode,
                                     cfg.heat_generations,
                                     cfg.post_generations);
    } else if (cfg.scenario == "ld") {
        if (!cfg.function) throw_config("ld scenario needs a function");
        report = scenario_linkage(*cfg.function, ld_start(cfg), cfg.steps,
                                  cfg.ld_selection);
    } else {
        throw_config("unknown scenario '" + cfg.scenario + "'");
    }
    report.config_hash = config_hash(cfg.canonical_text);
    return report;
}

std::vector<ScenarioReport> sweep(const ExperimentConfig& base,
                                  const std::string& axis,
                                  const std::vector<double>& values) {
    std::vector<ScenarioReport> out;
    for (double value : values) {
        ExperimentConfig cfg = base;
        try {
            if (axis == "N") {
                cfg.sample_size = static_cast<int>(value);
            } else if (axis == "T") {
                cfg.steps = static_cast<long>(value);
            } else if (axis == "epsilon") {
                if (!cfg.function)
                    throw_config("epsilon sweep needs a function");
                cfg.function = BooleanFitnessFunction(
                    cfg.function->n(), cfg.function->predicate(),
                    FitnessLandscape::weak_selection(value));
            } else if (axis == "n") {
                if (!cfg.function) throw_config("n sweep needs a function");
                const int n = static_cast<int>(value);
                cfg.function = BooleanFitnessFunction(
                    n, cfg.function->predicate(),
                    cfg.function->landscape());
                cfg.n = n;
            } else {
                throw_config("sweep axis must be N, epsilon, n or T");
            }
            ScenarioReport r = run_scenario(cfg);
            r.stat("sweep_axis", axis);
            r.stat("sweep_value", value);
            out.push_back(std::move(r));
        } catch (const Error& e) {
            ScenarioReport failed;
            failed.scenario = base.scenario;
            failed.stat("sweep_axis", axis);
            failed.stat("sweep_value", value);
            failed.stat("error", std::string(e.what()));
            failed.assertions.push_back({"cell_ran", false, 0.0, 1.0});
            failed.version = kVersion;
            failed.kernel_backend =
                kern::backend_name(kern::active_backend());
            out.push_back(std::move(failed));
        }
    }
    return out;
}

}  // namespace boolution
