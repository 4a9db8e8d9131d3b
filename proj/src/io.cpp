#include "boolution/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace boolution {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw_config(msg); }

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& item : obj.items()) {
        if (!known.count(item.key()))
            bad("unknown key '" + item.key() + "' in " + where);
    }
}

int get_int(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number_integer())
        bad(std::string("missing or non-integer field '") + key + "'");
    return obj[key].get<int>();
}

std::vector<std::uint64_t> parse_hex_table(const std::string& hex, int n) {
    const std::size_t bits = std::size_t(1) << n;
    const std::size_t digits = (bits + 3) / 4;
    if (hex.size() != digits)
        bad("truth table hex must have exactly " + std::to_string(digits) +
            " digits for n = " + std::to_string(n));
    std::vector<std::uint64_t> words((bits + 63) / 64, 0);
    for (std::size_t d = 0; d < digits; ++d) {
        const char c = hex[d];
        int v;
        if (c >= '0' && c <= '9') {
            v = c - '0';
        } else if (c >= 'a' && c <= 'f') {
            v = c - 'a' + 10;
        } else if (c >= 'A' && c <= 'F') {
            v = c - 'A' + 10;
        } else {
            bad("bad hex digit in truth table");
        }
        // digit d covers bits [4*(digits-1-d), 4*(digits-1-d)+3]
        const std::size_t base = 4 * (digits - 1 - d);
        for (int b = 0; b < 4; ++b) {
            const std::size_t bit = base + static_cast<std::size_t>(b);
            if (bit >= bits) continue;
            if ((v >> b) & 1)
                words[bit >> 6] |= std::uint64_t(1) << (bit & 63);
        }
    }
    return words;
}

std::string table_to_hex(const std::vector<std::uint64_t>& words, int n) {
    const std::size_t bits = std::size_t(1) << n;
    const std::size_t digits = (bits + 3) / 4;
    std::string hex(digits, '0');
    for (std::size_t d = 0; d < digits; ++d) {
        const std::size_t base = 4 * (digits - 1 - d);
        int v = 0;
        for (int b = 0; b < 4; ++b) {
            const std::size_t bit = base + static_cast<std::size_t>(b);
            if (bit >= bits) continue;
            if ((words[bit >> 6] >> (bit & 63)) & 1u) v |= 1 << b;
        }
        hex[d] = "0123456789abcdef"[v];
    }
    return hex;
}

FitnessLandscape landscape_from_json(const json& obj) {
    if (!obj.contains("landscape") || !obj["landscape"].is_string())
        bad("missing 'landscape' field");
    const std::string kind = obj["landscape"].get<std::string>();
    if (kind == "lethal") {
        if (obj.contains("epsilon")) bad("lethal landscape takes no epsilon");
        return FitnessLandscape::lethal();
    }
    if (kind != "weak") bad("landscape must be 'weak' or 'lethal'");
    if (!obj.contains("epsilon") || !obj["epsilon"].is_number())
        bad("weak landscape needs a numeric 'epsilon'");
    return FitnessLandscape::weak_selection(obj["epsilon"].get<double>());
}

}  // namespace

BooleanFitnessFunction parse_function_json(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::exception& e) {
        bad(std::string("function file is not valid JSON: ") + e.what());
    }
    if (!obj.is_object()) bad("function file must hold a JSON object");
    reject_unknown_keys(obj, {"n", "family", "params", "landscape", "epsilon"},
                        "function file");
    const int n = get_int(obj, "n");
    if (!obj.contains("family") || !obj["family"].is_string())
        bad("missing 'family' field");
    const std::string family = obj["family"].get<std::string>();
    const FitnessLandscape land = landscape_from_json(obj);
    const json params = obj.contains("params") ? obj["params"] : json::object();
    if (!params.is_object()) bad("'params' must be an object");

    if (family == "truth_table") {
        reject_unknown_keys(params, {"hex"}, "truth_table params");
        if (!params.contains("hex") || !params["hex"].is_string())
            bad("truth_table needs a 'hex' string");
        TruthTablePredicate tt;
        tt.words = parse_hex_table(params["hex"].get<std::string>(), n);
        return BooleanFitnessFunction(n, std::move(tt), land);
    }
    if (family == "threshold") {
        reject_unknown_keys(params, {"k", "h"}, "threshold params");
        ThresholdPredicate th;
        th.k = get_int(params, "k");
        th.env_h = params.contains("h") ? get_int(params, "h") : -1;
        return BooleanFitnessFunction(n, th, land);
    }
    if (family == "tribes") {
        reject_unknown_keys(params, {"width"}, "tribes params");
        return BooleanFitnessFunction(
            n, TribesPredicate{get_int(params, "width")}, land);
    }
    if (family == "parity") {
        reject_unknown_keys(params, {"loci"}, "parity params");
        ParityPredicate pa;
        if (params.contains("loci")) {
            if (!params["loci"].is_array()) bad("'loci' must be an array");
            for (const auto& v : params["loci"]) pa.loci.push_back(v.get<int>());
        }
        return BooleanFitnessFunction(n, std::move(pa), land);
    }
    if (family == "sum_equals_k") {
        reject_unknown_keys(params, {"k"}, "sum_equals_k params");
        return BooleanFitnessFunction(
            n, SumEqualsKPredicate{get_int(params, "k")}, land);
    }
    if (family == "cnf") {
        reject_unknown_keys(params, {"clauses"}, "cnf params");
        if (!params.contains("clauses") || !params["clauses"].is_array())
            bad("cnf needs a 'clauses' array");
        CnfPredicate cnf;
        for (const auto& cl : params["clauses"]) {
            if (!cl.is_array()) bad("each clause must be an array");
            std::vector<int> clause;
            for (const auto& lit : cl) clause.push_back(lit.get<int>());
            cnf.clauses.push_back(std::move(clause));
        }
        return BooleanFitnessFunction(n, std::move(cnf), land);
    }
    bad("unknown function family '" + family + "'");
}

BooleanFitnessFunction load_function_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open function file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_function_json(buffer.str());
}

std::string function_to_json(const BooleanFitnessFunction& f) {
    json obj;
    obj["n"] = f.n();
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TruthTablePredicate>) {
                obj["family"] = "truth_table";
                obj["params"] = {{"hex", table_to_hex(p.words, f.n())}};
            } else if constexpr (std::is_same_v<T, ThresholdPredicate>) {
                obj["family"] = "threshold";
                obj["params"] = {{"k", p.k}, {"h", p.env_h}};
            } else if constexpr (std::is_same_v<T, TribesPredicate>) {
                obj["family"] = "tribes";
                obj["params"] = {{"width", p.width}};
            } else if constexpr (std::is_same_v<T, ParityPredicate>) {
                obj["family"] = "parity";
                if (!p.loci.empty()) obj["params"] = {{"loci", p.loci}};
            } else if constexpr (std::is_same_v<T, SumEqualsKPredicate>) {
                obj["family"] = "sum_equals_k";
                obj["params"] = {{"k", p.k}};
            } else {
                obj["family"] = "cnf";
                obj["params"] = {{"clauses", p.clauses}};
            }
        },
        f.predicate());
    if (f.landscape().is_weak()) {
        obj["landscape"] = "weak";
        obj["epsilon"] = f.landscape().epsilon();
    } else {
        obj["landscape"] = "lethal";
    }
    return obj.dump(2);
}

FitnessLandscape parse_landscape(const std::string& text) {
    if (text == "lethal") return FitnessLandscape::lethal();
    if (text.rfind("weak:", 0) == 0) {
        const std::string num = text.substr(5);
        char* end = nullptr;
        const double eps = std::strtod(num.c_str(), &end);
        if (end == num.c_str() || *end != '\0')
            bad("bad epsilon in landscape '" + text + "'");
        return FitnessLandscape::weak_selection(eps);
    }
    bad("landscape must be 'weak:EPS' or 'lethal'");
}

BooleanFitnessFunction resolve_function(const std::string& spec,
                                        std::optional<int> n,
                                        std::optional<FitnessLandscape> land) {
    auto need_n = [&]() -> int {
        if (!n) bad("function shorthand '" + spec + "' needs --n");
        return *n;
    };
    auto need_land = [&]() -> FitnessLandscape {
        if (!land) bad("function shorthand '" + spec + "' needs --landscape");
        return *land;
    };
    auto suffix_int = [&](const std::string& s) {
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0')
            bad("bad numeric parameter in '" + spec + "'");
        return static_cast<int>(v);
    };

    if (spec == "and")
        return BooleanFitnessFunction::and_function(need_n(), need_land());
    if (spec == "or")
        return BooleanFitnessFunction::or_function(need_n(), need_land());
    if (spec == "maj")
        return BooleanFitnessFunction::majority(need_n(), need_land());
    if (spec == "parity")
        return BooleanFitnessFunction::parity(need_n(), need_land());
    if (spec.rfind("tribes:", 0) == 0) {
        const int width = suffix_int(spec.substr(7));
        const int nn = need_n();
        if (width < 1 || nn % width != 0) bad("tribes width must divide n");
        return BooleanFitnessFunction::tribes(width, nn / width, need_land());
    }
    if (spec.rfind("sumeq:", 0) == 0)
        return BooleanFitnessFunction::sum_equals_k(
            need_n(), suffix_int(spec.substr(6)), need_land());
    if (spec.rfind("threshold:", 0) == 0) {
        std::string rest = spec.substr(10);
        int h = -1;
        const std::size_t colon = rest.find(':');
        if (colon != std::string::npos) {
            h = suffix_int(rest.substr(colon + 1));
            rest = rest.substr(0, colon);
        }
        return BooleanFitnessFunction::waddington(need_n(), suffix_int(rest),
                                                  h, need_land());
    }
    BooleanFitnessFunction f = load_function_file(spec);
    if (n && *n != f.n()) bad("--n disagrees with the function file");
    if (land) {
        // explicit flag overrides the file's landscape
        return BooleanFitnessFunction(f.n(), f.predicate(), *land);
    }
    return f;
}

ProductPoint parse_mu0(const std::string& text, int n) {
    if (text == "uniform") return ProductPoint::uniform(n);
    if (text.rfind("vertex:", 0) == 0) {
        char* end = nullptr;
        const unsigned long mask = std::strtoul(text.c_str() + 7, &end, 0);
        if (*end != '\0') bad("bad vertex mask in '" + text + "'");
        return ProductPoint::vertex(
            Genotype::from_mask(static_cast<std::uint32_t>(mask), n));
    }
    std::vector<double> mu;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str()) bad("bad mu0 entry '" + item + "'");
        mu.push_back(v);
    }
    if (static_cast<int>(mu.size()) != n)
        bad("mu0 needs exactly n = " + std::to_string(n) + " entries");
    return ProductPoint(std::move(mu));
}

SeedRange parse_seed_range(const std::string& text) {
    const std::size_t dots = text.find("..");
    SeedRange r;
    auto parse_u64 = [&](const std::string& s) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0')
            bad("bad seed value '" + s + "'");
        return static_cast<std::uint64_t>(v);
    };
    if (dots == std::string::npos) {
        r.from = r.to = parse_u64(text);
    } else {
        r.from = parse_u64(text.substr(0, dots));
        r.to = parse_u64(text.substr(dots + 2));
    }
    if (r.to < r.from) bad("seed range is empty");
    return r;
}

SeedRange apply_seed_env(SeedRange parsed) {
    if (const char* env = std::getenv("BOOLUTION_SEED")) {
        return parse_seed_range(env);
    }
    return parsed;
}

std::vector<int> load_h_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open h-schedule file '" + path + "'");
    std::vector<int> schedule;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::stringstream ss(line);
        int v;
        while (ss >> v) {
            if (v != 1 && v != -1) bad("h-schedule entries must be +1 or -1");
            schedule.push_back(v);
        }
    }
    if (schedule.empty()) bad("h-schedule file is empty");
    return schedule;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void CsvWriter::header(const std::vector<std::string>& names) {
    row(names);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    CsvWriter csv(out);
    std::vector<std::string> header = {"t"};
    for (int i = 1; i <= trajectory.n; ++i)
        header.push_back("mu_" + std::to_string(i));
    for (int i = 1; i <= trajectory.n; ++i)
        header.push_back("nu_" + std::to_string(i));
    header.insert(header.end(), {"ext_mu", "ext_nu", "ext_mu_after",
                                 "linear_mass", "sat_prob"});
    csv.header(header);
    for (const StepRecord& rec : trajectory.records) {
        std::vector<std::string> cells = {std::to_string(rec.t)};
        for (double v : rec.mu_before) cells.push_back(format_double(v));
        for (double v : rec.nu) cells.push_back(format_double(v));
        cells.push_back(format_double(rec.ext_mu));
        cells.push_back(format_double(rec.ext_nu));
        cells.push_back(format_double(rec.ext_mu_after));
        cells.push_back(format_double(rec.linear_mass));
        cells.push_back(format_double(rec.sat_prob));
        csv.row(cells);
    }
}

void write_waddington_csv(std::ostream& out,
                          const std::vector<WaddingtonGeneration>& report) {
    CsvWriter csv(out);
    csv.header({"t", "h", "sat_heat", "sat_normal", "mean_mu", "extinct"});
    for (const auto& g : report) {
        csv.row({std::to_string(g.t), std::to_string(g.h),
                 format_double(g.sat_heat), format_double(g.sat_normal),
                 format_double(g.mean_mu), g.extinct ? "1" : "0"});
    }
}

std::string config_hash(const std::string& canonical_text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace boolution
