#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "boolution/dynamics.hpp"
#include "boolution/function.hpp"

namespace boolution {

// ---------------------------------------------------------------------------
// Function definition files (JSON)
// ---------------------------------------------------------------------------
// Schema:
//   {
//     "n": 2,
//     "family": "truth_table" | "threshold" | "tribes" | "parity"
//             | "sum_equals_k" | "cnf",
//     "params": { ... family-specific ... },          // optional for parity
//     "landscape": "weak" | "lethal",
//     "epsilon": 0.1                                   // weak only
//   }
// params:
//   truth_table:  {"hex": "8"}       2^n satisfaction bits as hex, most
//                                    significant digit first; bit m of the
//                                    value <=> genotype mask m (locus 0 =
//                                    LSB, bit set = allele +1)
//   threshold:    {"k": 3, "h": -1}  h optional, default -1
//   tribes:       {"width": 2}
//   parity:       {"loci": [0,1]}    optional, default all loci
//   sum_equals_k: {"k": 2}
//   cnf:          {"clauses": [[1,-2],[2]]}   DIMACS-style literals
// Unknown keys anywhere are config errors.

BooleanFitnessFunction load_function_file(const std::string& path);
BooleanFitnessFunction parse_function_json(const std::string& text);
std::string function_to_json(const BooleanFitnessFunction& f);

// Shorthand accepted wherever a function file is: "and", "or", "maj",
// "parity", "tribes:WIDTH", "threshold:K[:H]", "sumeq:K"; n and the
// landscape come from the surrounding flags.  Falls back to reading a file.
BooleanFitnessFunction resolve_function(const std::string& spec_or_path,
                                        std::optional<int> n,
                                        std::optional<FitnessLandscape> land);

// Landscape flag syntax: "weak:0.1" or "lethal".
FitnessLandscape parse_landscape(const std::string& text);

// mu0 flag syntax: "uniform", "vertex:MASK", or comma-separated values.
ProductPoint parse_mu0(const std::string& text, int n);

// Seed range "A..B" (inclusive) or a single seed.  The BOOLUTION_SEED
// environment variable, when set, overrides the flag with a single seed.
struct SeedRange {
    std::uint64_t from = 0;
    std::uint64_t to = 0;  // inclusive
    std::uint64_t count() const { return to - from + 1; }
};
SeedRange parse_seed_range(const std::string& text);
SeedRange apply_seed_env(SeedRange parsed);

// h-schedule file: one +1/-1 per line (blank lines and # comments ignored).
std::vector<int> load_h_schedule(const std::string& path);

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

// Doubles are printed with %.17g so equal values produce equal bytes.
std::string format_double(double v);

class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    void header(const std::vector<std::string>& names);
    void row(const std::vector<std::string>& cells);

  private:
    std::ostream& out_;
};

// Trajectory CSV: t, mu_1..mu_n, nu_1..nu_n, ext_mu, ext_nu, ext_mu_after,
// linear_mass, sat_prob.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

void write_waddington_csv(std::ostream& out,
                          const std::vector<WaddingtonGeneration>& report);

// FNV-1a over a canonical config rendering; stable across runs.
std::string config_hash(const std::string& canonical_text);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace boolution
