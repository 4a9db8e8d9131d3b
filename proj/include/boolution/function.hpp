#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "boolution/types.hpp"

namespace boolution {

// Exact enumeration over {-1,+1}^n is offered up to this locus count; the
// count-based dynamic program covers Threshold / SumEqualsK beyond it.
inline constexpr int kMaxEnumerationN = 24;

// ---------------------------------------------------------------------------
// Fitness landscapes
// ---------------------------------------------------------------------------

// Weak selection maps satisfied -> 1+eps, unsatisfied -> 1.
// Lethal maps satisfied -> 1, unsatisfied -> 0.
class FitnessLandscape {
  public:
    static FitnessLandscape weak_selection(double epsilon) {
        if (!(epsilon > 0.0))
            throw_argument("weak selection requires epsilon > 0");
        return FitnessLandscape(epsilon);
    }
    static FitnessLandscape lethal() { return FitnessLandscape(); }

    bool is_weak() const { return epsilon_.has_value(); }
    bool is_lethal() const { return !epsilon_.has_value(); }

    double epsilon() const {
        if (!epsilon_) throw_argument("lethal landscape has no epsilon");
        return *epsilon_;
    }

    double satisfied_value() const { return epsilon_ ? 1.0 + *epsilon_ : 1.0; }
    double unsatisfied_value() const { return epsilon_ ? 1.0 : 0.0; }
    double value(bool satisfied) const {
        return satisfied ? satisfied_value() : unsatisfied_value();
    }

    bool operator==(const FitnessLandscape&) const = default;

  private:
    FitnessLandscape() = default;
    explicit FitnessLandscape(double eps) : epsilon_(eps) {}
    std::optional<double> epsilon_;
};

// ---------------------------------------------------------------------------
// Predicate families
// ---------------------------------------------------------------------------

// Explicit table of 2^n satisfaction bits, indexed by genotype mask
// (locus 0 = LSB, bit set <=> allele +1).
struct TruthTablePredicate {
    std::vector<std::uint64_t> words;  // 2^n bits packed LSB-first
    bool bit(std::uint32_t mask) const {
        return (words[mask >> 6] >> (mask & 63)) & 1u;
    }
};

// Waddington threshold: satisfied iff x_1+...+x_n + (1+h)/2 * k >= n,
// equivalently (+1 count) >= min_plus_count(n).  h in {-1,+1} is the
// exogenous environment flag (heat shock); default -1 = normal environment.
struct ThresholdPredicate {
    int k = 0;
    int env_h = -1;
    int min_plus_count(int n) const {
        const int sum_needed = n - k * ((1 + env_h) / 2);
        // smallest integer count c with 2c - n >= sum_needed
        return (n + sum_needed + 1) / 2;
    }
};

// OR of n/width disjoint ANDs over consecutive loci.
struct TribesPredicate {
    int width = 1;
};

// Satisfied iff the product of the designated loci's alleles is -1
// (an odd number of -1 alleles among them).
struct ParityPredicate {
    std::vector<int> loci;  // strictly increasing, may be empty = all loci
};

// Satisfied iff exactly k loci carry allele +1.
struct SumEqualsKPredicate {
    int k = 0;
};

// DIMACS-style clauses: literal +i means locus i-1 must be +1, -i means -1.
struct CnfPredicate {
    std::vector<std::vector<int>> clauses;
};

using Predicate =
    std::variant<TruthTablePredicate, ThresholdPredicate, TribesPredicate,
                 ParityPredicate, SumEqualsKPredicate, CnfPredicate>;

// Cached satisfaction bits for mask-indexed enumeration.
struct SatTable {
    std::vector<std::uint64_t> words;
    bool bit(std::uint32_t mask) const {
        return (words[mask >> 6] >> (mask & 63)) & 1u;
    }
};

// ---------------------------------------------------------------------------
// BooleanFitnessFunction
// ---------------------------------------------------------------------------

class BooleanFitnessFunction {
  public:
    BooleanFitnessFunction(int n, Predicate predicate,
                           FitnessLandscape landscape);

    int n() const { return n_; }
    const Predicate& predicate() const { return predicate_; }
    const FitnessLandscape& landscape() const { return landscape_; }

    // True iff the predicate depends only on the +1 count (Threshold,
    // SumEqualsK); those families support the dynamic-program backend.
    bool is_count_family() const;

    bool satisfied(const Genotype& x) const;
    bool satisfied_mask(std::uint32_t mask) const;

    // landscape value of x; argument error on length mismatch.
    double evaluate(const Genotype& x) const;

    // Copy with the environment flag replaced (Threshold only).
    BooleanFitnessFunction with_environment(int h) const;

    // For count families: satisfied as a function of the +1 count.
    bool count_satisfied(int plus_count) const;

    // Satisfiability; exact for count families at any n, by enumeration for
    // everything else (capability error past the enumeration cap).
    bool is_satisfiable() const;

    // Shared satisfaction table (built lazily, n <= kMaxEnumerationN).
    const SatTable& sat_table() const;

    // Convenience constructors used throughout tests and the CLI.
    static BooleanFitnessFunction from_truth_table_bits(
        int n, const std::vector<bool>& sat, FitnessLandscape landscape);
    static BooleanFitnessFunction and_function(int n,
                                               FitnessLandscape landscape);
    static BooleanFitnessFunction or_function(int n,
                                              FitnessLandscape landscape);
    static BooleanFitnessFunction parity(int n, FitnessLandscape landscape);
    static BooleanFitnessFunction majority(int n, FitnessLandscape landscape);
    static BooleanFitnessFunction tribes(int width, int n_tribes,
                                         FitnessLandscape landscape);
    static BooleanFitnessFunction waddington(int n, int k, int h,
                                             FitnessLandscape landscape);
    static BooleanFitnessFunction sum_equals_k(int n, int k,
                                               FitnessLandscape landscape);

  private:
    int n_;
    Predicate predicate_;
    FitnessLandscape landscape_;
    // Lazily built, shared by copies of the same function value.
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

}  // namespace boolution
