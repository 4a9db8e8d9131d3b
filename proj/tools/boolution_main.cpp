// boolution — population dynamics of truth assignments under weak selection.
//
// Subcommands: simulate, verify, waddington, fixation, monotone, ld, sweep,
// fourier, validate, plot.  Exit codes: 0 = all assertions pass, 1 =
// assertion failure, 2 = configuration error, 3 = capability error.

#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "boolution/experiments.hpp"
#include "boolution/fourier.hpp"
#include "boolution/io.hpp"
#include "boolution/kernels.hpp"
#include "boolution/rng.hpp"
#include "boolution/verification.hpp"

namespace {

using namespace boolution;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_config("cannot open output file '" + path + "'");
    return out;
}

int emit_report(const ScenarioReport& report, const std::string& out_path,
                bool as_json) {
    if (!out_path.empty()) {
        auto out = open_out(out_path);
        write_report_csv(out, report);
    }
    if (as_json) {
        std::cout << report_to_json(report) << "\n";
    } else {
        std::ostringstream ss;
        write_report_csv(ss, report);
        std::cout << ss.str();
    }
    std::cerr << "wall: " << report.wall_seconds << "s\n";
    return report.all_pass() ? 0 : 1;
}

struct FunctionFlags {
    std::string function;
    std::optional<int> n;
    std::string landscape;

    void attach(CLI::App* cmd, bool require_function = true) {
        auto* opt = cmd->add_option(
            "--function", function,
            "function file or shorthand (and|or|maj|parity|tribes:W|"
            "threshold:K[:H]|sumeq:K)");
        if (require_function) opt->required();
        cmd->add_option("--n", n_holder, "locus count for shorthands");
        cmd->add_option("--landscape", landscape,
                        "weak:EPS or lethal (overrides the file)");
    }

    BooleanFitnessFunction resolve() {
        std::optional<FitnessLandscape> land;
        if (!landscape.empty()) land = parse_landscape(landscape);
        if (n_holder > 0) n = n_holder;
        return resolve_function(function, n, land);
    }

    int n_holder = 0;
};

// -------------------------------------------------------------------------
// verify subcommand: one row per check, residual CSV on request
// -------------------------------------------------------------------------

struct VerifyRow {
    std::string check;
    long instances = 0;
    double worst = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::vector<double> residuals;  // one entry per instance
};

BooleanFitnessFunction random_function(CounterStream& rng, int n, double eps) {
    std::vector<bool> sat(std::size_t(1) << n);
    bool any = false, all = true;
    for (std::size_t m = 0; m < sat.size(); ++m) {
        sat[m] = rng.next_unit() < 0.5;
        any = any || sat[m];
        all = all && sat[m];
    }
    if (!any) sat[rng.next_below(sat.size())] = true;
    if (all) sat[rng.next_below(sat.size())] = false;
    return BooleanFitnessFunction::from_truth_table_bits(
        n, sat, FitnessLandscape::weak_selection(eps));
}

ProductPoint random_point(CounterStream& rng, int n, double radius) {
    std::vector<double> mu(static_cast<std::size_t>(n));
    for (double& v : mu) v = rng.next_in(-radius, radius);
    return ProductPoint(std::move(mu));
}

VerifyRow verify_density(long instances, std::uint64_t seed) {
    VerifyRow row{"density", instances, 1e300, 1e-10, true, {}};
    CounterStream rng = stream_for(seed, 0, 101);
    double worst = 1e300;
    for (long i = 0; i < instances; ++i) {
        const int n = 2 + static_cast<int>(rng.next_below(3));
        const auto f = random_function(rng, n, 0.9 / (2 * n));
        const int big_n = 2 + static_cast<int>(rng.next_below(99));
        double local = 1e300;
        RunOptions opt;
        opt.record_every = 0;
        opt.observer = [&](const StepRecord& rec) {
            const double ne = n * f.landscape().epsilon();
            const double gap = rec.selection_increment -
                               (1.0 - ne) * rec.linear_mass;
            local = std::min(local, gap);
        };
        run_finite(f, random_point(rng, n, 0.95), big_n, 50, seed + 7 * i,
                   opt);
        row.residuals.push_back(local);
        worst = std::min(worst, local);
    }
    row.worst = worst;
    row.pass = worst >= -row.threshold;
    return row;
}

VerifyRow verify_coord(long instances, std::uint64_t seed) {
    VerifyRow row{"coord", instances, 0.0, 1e-9, true, {}};
    CounterStream rng = stream_for(seed, 0, 102);
    double worst = 0.0;
    for (long i = 0; i < instances; ++i) {
        const int n = 2 + static_cast<int>(rng.next_below(3));
        // tiny epsilon: the expansion's neglected terms scale as eps^3
        const auto f = random_function(rng, n, 1e-4);
        const auto nu = random_point(rng, n, 0.9);
        const int locus = 1 + static_cast<int>(rng.next_below(n - 1));
        const double r =
            std::abs(hybrid_derivative_residual(f, nu, locus));
        row.residuals.push_back(r);
        worst = std::max(worst, r);
    }
    row.worst = worst;
    row.pass = worst < row.threshold;
    return row;
}

VerifyRow verify_variance(long instances, std::uint64_t seed) {
    VerifyRow row{"variance", instances, 0.0, 1e-12, true, {}};
    CounterStream rng = stream_for(seed, 0, 103);
    double worst = -1e300;
    for (long i = 0; i < instances; ++i) {
        const int n = 1 + static_cast<int>(rng.next_below(3));
        const auto f = random_function(rng, n, 0.9 / (2 * n));
        const int big_n = 2 + static_cast<int>(rng.next_below(29));
        const auto mu = random_point(rng, n, 0.9);
        const auto vn = variance_noise_exact(f, mu, big_n);
        const auto nf = noise_fitness_check(f, mu, big_n);
        const double slack = std::max(vn.lhs - vn.rhs, nf.lhs - nf.rhs);
        row.residuals.push_back(slack);
        worst = std::max(worst, slack);
    }
    row.worst = worst;
    row.pass = worst <= row.threshold;
    return row;
}

VerifyRow verify_phi(long instances, std::uint64_t seed) {
    VerifyRow row{"phi", instances, 0.0, 1e-12, true, {}};
    CounterStream rng = stream_for(seed, 0, 104);
    double worst = 0.0;
    for (long i = 0; i < instances; ++i) {
        const int big_n = 2 + static_cast<int>(rng.next_below(63));
        const double mu_i = rng.next_in(-0.95, 0.95);
        const auto pm = phi_moments(ProductPoint({mu_i}), big_n, 0);
        const double dev =
            std::max(std::abs(pm.second_moment - 1.0 / big_n),
                     std::abs(pm.variance_ratio - (1.0 - 1.0 / big_n)));
        row.residuals.push_back(dev);
        worst = std::max(worst, dev);
    }
    row.worst = worst;
    row.pass = worst < row.threshold;
    return row;
}

VerifyRow verify_martingale(long instances, std::uint64_t seed) {
    VerifyRow row{"martingale", instances, 0.0, 4.0, true, {}};
    const auto f = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    const int big_n = 50;
    const long steps = 200;
    const SeedRange seeds{seed, seed + static_cast<std::uint64_t>(instances) -
                                    1};
    row.residuals = map_seeds<double>(seeds, [&](std::uint64_t s) {
        const Trajectory traj =
            run_finite(f, ProductPoint::uniform(2), big_n, steps, s, {});
        return martingale_accumulate(traj).s_total;
    });
    double mean = 0.0, sq = 0.0;
    for (double v : row.residuals) {
        mean += v;
        sq += v * v;
    }
    mean /= static_cast<double>(row.residuals.size());
    sq /= static_cast<double>(row.residuals.size());
    const double se = std::sqrt(std::max(0.0, sq - mean * mean) /
                                static_cast<double>(row.residuals.size()));
    row.worst = se > 0 ? std::abs(mean) / se : 0.0;
    row.pass = row.worst <= row.threshold;  // mean within 4 SE of zero
    return row;
}

VerifyRow verify_determined(long instances, std::uint64_t seed) {
    VerifyRow row{"determined", instances, 0.0, 1.0, true, {}};
    const auto f = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    const int big_n = 50;
    bool all_consistent = true;
    long absorbed = 0;
    for (long i = 0; i < instances; ++i) {
        const Trajectory traj = run_finite(f, ProductPoint::uniform(2), big_n,
                                           100000, seed + 13 * i, {});
        const auto tracker = determined_report(traj);
        all_consistent = all_consistent && tracker.absorption_consistent;
        absorbed += traj.fixed;
        row.residuals.push_back(
            traj.fixed && tracker.absorption_consistent ? 0.0 : 1.0);
    }
    row.worst = static_cast<double>(instances - absorbed);
    row.pass = all_consistent && absorbed == instances;
    return row;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "boolution: evolution of populations of truth assignments under "
        "weak selection"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "mirror tabular output as JSON");

    // ---- simulate ----
    auto* sim = app.add_subcommand(
        "simulate", "run the infinite or finite population process");
    FunctionFlags sim_fn;
    sim_fn.attach(sim);
    int sim_N = 0;
    long sim_T = 100;
    std::string sim_seeds = "0";
    std::string sim_mu0 = "uniform";
    std::string sim_out;
    int sim_record = 1;
    bool sim_no_early = false;
    std::string sim_sched;
    sim->add_option("--N", sim_N, "population size (omit or 0 for infinite)");
    sim->add_option("--T", sim_T, "generations");
    sim->add_option("--seeds", sim_seeds, "seed or range a..b");
    sim->add_option("--mu0", sim_mu0, "uniform | vertex:MASK | csv");
    sim->add_option("--h-schedule", sim_sched,
                    "environment schedule file (threshold predicates)");
    sim->add_option("--out", sim_out, "trajectory CSV path (finite: one file "
                    "per seed with .SEED suffix when the range has several)");
    sim->add_option("--record-every", sim_record, "record cadence (0 = none)");
    sim->add_flag("--no-early-stop", sim_no_early,
                  "keep running after the sample reaches a vertex");

    // ---- verify ----
    auto* ver = app.add_subcommand("verify",
                                   "run the lemma-level verification checks");
    std::string ver_check = "all";
    long ver_instances = 100;
    std::uint64_t ver_seed = 1;
    std::string ver_out;
    ver->add_option("--check", ver_check,
                    "density|coord|variance|phi|martingale|determined|all");
    ver->add_option("--instances", ver_instances, "instances per check");
    ver->add_option("--seed", ver_seed, "base seed");
    ver->add_option("--out", ver_out, "residual CSV path");

    // ---- waddington ----
    auto* wad = app.add_subcommand("waddington",
                                   "genetic assimilation scenario");
    int wad_n = 10, wad_k = 3, wad_heat = 10, wad_post = 5, wad_N = 0;
    std::string wad_land = "lethal", wad_out, wad_seeds = "0";
    wad->add_option("--n", wad_n, "locus count");
    wad->add_option("--k", wad_k, "threshold shift k");
    wad->add_option("--heat", wad_heat, "generations with h=+1");
    wad->add_option("--post", wad_post, "generations with h=-1 afterwards");
    wad->add_option("--landscape", wad_land, "weak:EPS or lethal");
    wad->add_option("--N", wad_N, "population size (0 = infinite)");
    wad->add_option("--seeds", wad_seeds, "seed (finite mode)");
    wad->add_option("--out", wad_out, "report CSV path");

    // ---- fixation ----
    auto* fix = app.add_subcommand("fixation",
                                   "ensemble fixation experiment");
    FunctionFlags fix_fn;
    fix_fn.attach(fix);
    int fix_N = 50;
    long fix_T = 100000;
    std::string fix_seeds = "0..999", fix_mu0 = "uniform", fix_out;
    fix->add_option("--N", fix_N, "population size")->required();
    fix->add_option("--T", fix_T, "max generations");
    fix->add_option("--seeds", fix_seeds, "seed range a..b");
    fix->add_option("--mu0", fix_mu0, "initial point");
    fix->add_option("--out", fix_out, "report CSV path");

    // ---- monotone ----
    auto* mon = app.add_subcommand(
        "monotone", "deterministic run with the monotone fitness bound");
    FunctionFlags mon_fn;
    mon_fn.attach(mon);
    long mon_T = 100000;
    std::string mon_mu0 = "uniform", mon_out;
    mon->add_option("--T", mon_T, "generations");
    mon->add_option("--mu0", mon_mu0, "initial point");
    mon->add_option("--out", mon_out, "report CSV path");

    // ---- ld ----
    auto* ld = app.add_subcommand(
        "ld", "full-genotype recombination / linkage disequilibrium");
    FunctionFlags ld_fn;
    ld_fn.attach(ld);
    long ld_T = 20;
    std::string ld_p0 = "correlated", ld_out;
    bool ld_no_selection = false;
    ld->add_option("--T", ld_T, "generations");
    ld->add_option("--p0", ld_p0, "correlated | csv of 2^n probabilities");
    ld->add_flag("--no-selection", ld_no_selection, "skip the fitness step");
    ld->add_option("--out", ld_out, "report CSV path");

    // ---- sweep ----
    auto* sw = app.add_subcommand("sweep", "run a scenario across one axis");
    std::string sw_config, sw_axis, sw_values, sw_out;
    sw->add_option("--config", sw_config, "experiment config JSON")
        ->required();
    sw->add_option("--axis", sw_axis, "N|epsilon|n|T")->required();
    sw->add_option("--values", sw_values, "comma-separated values")
        ->required();
    sw->add_option("--out", sw_out, "combined CSV path");

    // ---- fourier ----
    auto* fou = app.add_subcommand("fourier", "biased Fourier coefficients");
    auto* dump = fou->add_subcommand("dump", "emit the full coefficient CSV");
    FunctionFlags fou_fn;
    fou_fn.attach(dump);
    std::string fou_mu = "uniform", fou_out;
    int fou_max_order = -1;
    dump->add_option("--mu", fou_mu, "base point (uniform | csv)");
    dump->add_option("--max-order", fou_max_order,
                     "emit subsets up to this order only");
    dump->add_option("--out", fou_out, "CSV path (default stdout)");
    fou->require_subcommand(1);

    // ---- validate ----
    auto* val = app.add_subcommand("validate",
                                   "check a config or function file");
    std::string val_config, val_function;
    val->add_option("--config", val_config, "experiment config JSON");
    val->add_option("--function", val_function, "function definition JSON");

    // ---- plot ----
    auto* plot = app.add_subcommand(
        "plot", "emit a gnuplot script for a trajectory or LD CSV");
    std::string plot_in, plot_out_prefix = "plot", plot_kind = "trajectory";
    plot->add_option("--in", plot_in, "input CSV")->required();
    plot->add_option("--kind", plot_kind, "trajectory|ld");
    plot->add_option("--out-prefix", plot_out_prefix, "output prefix");

    for (CLI::App* sub :
         {sim, ver, wad, fix, mon, ld, sw, fou, dump, val, plot})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            auto f = sim_fn.resolve();
            const auto mu0 = parse_mu0(sim_mu0, f.n());
            const SeedRange seeds = apply_seed_env(parse_seed_range(sim_seeds));
            RunOptions opt;
            opt.record_every = sim_record;
            opt.early_stop = !sim_no_early;
            if (!sim_sched.empty()) {
                // environment-schedule run (threshold predicate)
                const auto schedule = load_h_schedule(sim_sched);
                const auto* th =
                    std::get_if<ThresholdPredicate>(&f.predicate());
                if (th == nullptr)
                    throw_config("--h-schedule needs a threshold predicate");
                const WaddingtonMode mode =
                    sim_N > 0 ? WaddingtonMode::finite_population(
                                    sim_N, seeds.from)
                              : WaddingtonMode::infinite();
                const auto rows = waddington_scenario(
                    f.n(), th->k, schedule, f.landscape(), mode, mu0);
                if (!sim_out.empty()) {
                    auto out = open_out(sim_out);
                    write_waddington_csv(out, rows);
                } else {
                    write_waddington_csv(std::cout, rows);
                }
                return 0;
            }
            for (std::uint64_t seed = seeds.from; seed <= seeds.to; ++seed) {
                const Trajectory traj =
                    sim_N > 0 ? run_finite(f, mu0, sim_N, sim_T, seed, opt)
                              : run_infinite(f, mu0, sim_T, opt);
                std::string path = sim_out;
                if (!path.empty() && seeds.count() > 1)
                    path += "." + std::to_string(seed);
                if (!path.empty()) {
                    auto out = open_out(path);
                    write_trajectory_csv(out, traj);
                } else {
                    write_trajectory_csv(std::cout, traj);
                }
                if (sim_N == 0) break;  // deterministic: one run
            }
            return 0;
        }

        if (ver->parsed()) {
            std::vector<VerifyRow> rows;
            auto want = [&](const char* name) {
                return ver_check == "all" || ver_check == name;
            };
            if (want("density")) rows.push_back(verify_density(ver_instances, ver_seed));
            if (want("coord")) rows.push_back(verify_coord(ver_instances, ver_seed));
            if (want("variance"))
                rows.push_back(verify_variance(
                    std::min<long>(ver_instances, 50), ver_seed));
            if (want("phi")) rows.push_back(verify_phi(ver_instances, ver_seed));
            if (want("martingale"))
                rows.push_back(verify_martingale(
                    std::max<long>(ver_instances, 100), ver_seed));
            if (want("determined"))
                rows.push_back(verify_determined(
                    std::min<long>(ver_instances, 200), ver_seed));
            if (rows.empty()) throw_config("unknown check '" + ver_check + "'");

            std::ostringstream table;
            CsvWriter csv(table);
            csv.header({"check", "instances", "worst", "threshold", "pass"});
            bool all = true;
            for (const auto& r : rows) {
                csv.row({r.check, std::to_string(r.instances),
                         format_double(r.worst), format_double(r.threshold),
                         r.pass ? "1" : "0"});
                all = all && r.pass;
            }
            if (!ver_out.empty()) {
                auto out = open_out(ver_out);
                CsvWriter residuals(out);
                residuals.header({"check", "instance", "residual"});
                for (const auto& r : rows) {
                    for (std::size_t i = 0; i < r.residuals.size(); ++i)
                        residuals.row({r.check, std::to_string(i),
                                       format_double(r.residuals[i])});
                }
            }
            if (as_json) {
                nlohmann::json obj = nlohmann::json::array();
                for (const auto& r : rows)
                    obj.push_back({{"check", r.check},
                                   {"instances", r.instances},
                                   {"worst", r.worst},
                                   {"threshold", r.threshold},
                                   {"pass", r.pass}});
                std::cout << obj.dump(2) << "\n";
            } else {
                std::cout << table.str();
            }
            return all ? 0 : 1;
        }

        if (wad->parsed()) {
            const auto land = parse_landscape(wad_land);
            const SeedRange seeds = apply_seed_env(parse_seed_range(wad_seeds));
            const WaddingtonMode mode =
                wad_N > 0
                    ? WaddingtonMode::finite_population(wad_N, seeds.from)
                    : WaddingtonMode::infinite();
            const auto report = scenario_waddington(wad_n, wad_k, land, mode,
                                                    wad_heat, wad_post);
            return emit_report(report, wad_out, as_json);
        }

        if (fix->parsed()) {
            auto f = fix_fn.resolve();
            const auto report = scenario_fixation(
                f, parse_mu0(fix_mu0, f.n()), fix_N, fix_T,
                apply_seed_env(parse_seed_range(fix_seeds)));
            return emit_report(report, fix_out, as_json);
        }

        if (mon->parsed()) {
            auto f = mon_fn.resolve();
            const auto report = scenario_monotone_bound(
                f, parse_mu0(mon_mu0, f.n()), mon_T);
            return emit_report(report, mon_out, as_json);
        }

        if (ld->parsed()) {
            auto f = ld_fn.resolve();
            GenotypeDistribution p0 = [&] {
                if (ld_p0 == "correlated") {
                    std::vector<double> p(std::size_t(1) << f.n(), 0.0);
                    p.front() = 0.5;
                    p.back() = 0.5;
                    return GenotypeDistribution(std::move(p));
                }
                std::vector<double> p;
                std::stringstream ss(ld_p0);
                std::string item;
                while (std::getline(ss, item, ','))
                    p.push_back(std::strtod(item.c_str(), nullptr));
                return GenotypeDistribution(std::move(p));
            }();
            const auto report =
                scenario_linkage(f, p0, ld_T, !ld_no_selection);
            return emit_report(report, ld_out, as_json);
        }

        if (sw->parsed()) {
            const auto base = load_experiment_config(sw_config);
            std::vector<double> values;
            std::stringstream ss(sw_values);
            std::string item;
            while (std::getline(ss, item, ','))
                values.push_back(std::strtod(item.c_str(), nullptr));
            const auto reports = sweep(base, sw_axis, values);
            std::ostringstream table;
            CsvWriter csv(table);
            csv.header({"sweep_value", "scenario", "stat", "value"});
            bool all = true;
            for (const auto& r : reports) {
                std::string value;
                for (const auto& [k, v] : r.stats)
                    if (k == "sweep_value") value = v;
                for (const auto& [k, v] : r.stats)
                    csv.row({value, r.scenario, k, v});
                for (const auto& a : r.assertions) {
                    csv.row({value, r.scenario, "assert:" + a.name,
                             a.pass ? "1" : "0"});
                    all = all && a.pass;
                }
            }
            if (!sw_out.empty()) open_out(sw_out) << table.str();
            std::cout << table.str();
            return all ? 0 : 1;
        }

        if (fou->parsed()) {
            auto f = fou_fn.resolve();
            const auto mu = parse_mu0(fou_mu, f.n());
            const FourierTable table(f, mu);
            std::ostringstream out;
            CsvWriter csv(out);
            csv.header({"subset_mask", "order", "coefficient"});
            for (std::uint32_t s = 0; s < (1u << f.n()); ++s) {
                const int order = std::popcount(s);
                if (fou_max_order >= 0 && order > fou_max_order) continue;
                csv.row({std::to_string(s), std::to_string(order),
                         format_double(table.at(s))});
            }
            if (!fou_out.empty()) {
                open_out(fou_out) << out.str();
            } else {
                std::cout << out.str();
            }
            return 0;
        }

        if (val->parsed()) {
            if (val_config.empty() && val_function.empty())
                throw_config("validate needs --config or --function");
            if (!val_config.empty()) {
                load_experiment_config(val_config);
                std::cout << "config ok: " << val_config << "\n";
            }
            if (!val_function.empty()) {
                const auto f = load_function_file(val_function);
                std::cout << "function ok: n=" << f.n() << " satisfiable="
                          << (f.is_satisfiable() ? "yes" : "no") << "\n";
            }
            return 0;
        }

        if (plot->parsed()) {
            std::ifstream in(plot_in);
            if (!in) throw_config("cannot open '" + plot_in + "'");
            std::string header;
            std::getline(in, header);
            const std::string data = plot_out_prefix + ".dat";
            {
                std::ofstream out(data);
                out << header << "\n" << in.rdbuf();
            }
            std::ofstream gp(plot_out_prefix + ".gp");
            gp << "set datafile separator ','\n";
            gp << "set key autotitle columnhead\n";
            gp << "set xlabel 'generation'\n";
            if (plot_kind == "ld") {
                gp << "set logscale y\nset ylabel 'linkage disequilibrium'\n";
                gp << "plot '" << data << "' using 1:2 with lines\n";
            } else {
                gp << "set ylabel 'value'\n";
                gp << "plot for [col=2:*] '" << data
                   << "' using 1:col with lines\n";
            }
            std::cout << "wrote " << data << " and " << plot_out_prefix
                      << ".gp\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Config:
                return 2;
            case ErrorKind::Capability:
                return 3;
            default:
                return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
