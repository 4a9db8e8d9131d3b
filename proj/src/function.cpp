#include "boolution/function.hpp"

#include <algorithm>
#include <bit>
#include <mutex>

namespace boolution {

struct BooleanFitnessFunction::Cache {
    std::once_flag once;
    SatTable table;
};

namespace {

void validate_predicate(int n, const Predicate& predicate) {
    if (n < 1) throw_argument("locus count must be >= 1");
    if (const auto* tt = std::get_if<TruthTablePredicate>(&predicate)) {
        if (n > kMaxEnumerationN)
            throw_argument("explicit truth table limited to n <= 24");
        const std::size_t want = (std::size_t(1) << n) <= 64
                                     ? 1
                                     : (std::size_t(1) << n) / 64;
        if (tt->words.size() != want)
            throw_argument("truth table length must be 2^n bits");
    } else if (const auto* th = std::get_if<ThresholdPredicate>(&predicate)) {
        if (th->k < 0 || th->k > n)
            throw_argument("threshold k must satisfy 0 <= k <= n");
        if (th->env_h != 1 && th->env_h != -1)
            throw_argument("environment flag h must be +1 or -1");
    } else if (const auto* tr = std::get_if<TribesPredicate>(&predicate)) {
        if (tr->width < 1 || n % tr->width != 0)
            throw_argument("tribes width must divide n");
    } else if (const auto* pa = std::get_if<ParityPredicate>(&predicate)) {
        int prev = -1;
        for (int i : pa->loci) {
            if (i <= prev || i >= n)
                throw_argument("parity loci must be strictly increasing and < n");
            prev = i;
        }
    } else if (const auto* se = std::get_if<SumEqualsKPredicate>(&predicate)) {
        if (se->k < 0 || se->k > n)
            throw_argument("sum-equals-k requires 0 <= k <= n");
    } else if (const auto* cn = std::get_if<CnfPredicate>(&predicate)) {
        for (const auto& clause : cn->clauses) {
            if (clause.empty()) throw_argument("empty CNF clause");
            for (int lit : clause) {
                const int v = std::abs(lit);
                if (v < 1 || v > n)
                    throw_argument("CNF literal out of range");
            }
        }
    }
}

bool satisfied_by_mask(int n, const Predicate& predicate,
                       std::uint32_t mask) {
    return std::visit(
        [&](const auto& p) -> bool {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TruthTablePredicate>) {
                return p.bit(mask);
            } else if constexpr (std::is_same_v<T, ThresholdPredicate>) {
                return std::popcount(mask) >= p.min_plus_count(n);
            } else if constexpr (std::is_same_v<T, TribesPredicate>) {
                const std::uint32_t tribe_mask =
                    (p.width == 32) ? ~0u : ((1u << p.width) - 1u);
                for (int base = 0; base < n; base += p.width) {
                    if (((mask >> base) & tribe_mask) == tribe_mask)
                        return true;
                }
                return false;
            } else if constexpr (std::is_same_v<T, ParityPredicate>) {
                // product of designated alleles == -1: odd number of -1s
                int minus = 0;
                if (p.loci.empty()) {
                    minus = n - std::popcount(mask);
                } else {
                    for (int i : p.loci)
                        if (!((mask >> i) & 1u)) ++minus;
                }
                return (minus & 1) == 1;
            } else if constexpr (std::is_same_v<T, SumEqualsKPredicate>) {
                return std::popcount(mask) == p.k;
            } else {
                for (const auto& clause : p.clauses) {
                    bool sat = false;
                    for (int lit : clause) {
                        const int i = std::abs(lit) - 1;
                        const bool plus = (mask >> i) & 1u;
                        if ((lit > 0) == plus) {
                            sat = true;
                            break;
                        }
                    }
                    if (!sat) return false;
                }
                return true;
            }
        },
        predicate);
}

}  // namespace

BooleanFitnessFunction::BooleanFitnessFunction(int n, Predicate predicate,
                                               FitnessLandscape landscape)
    : n_(n),
      predicate_(std::move(predicate)),
      landscape_(landscape),
      cache_(std::make_shared<Cache>()) {
    validate_predicate(n_, predicate_);
}

bool BooleanFitnessFunction::is_count_family() const {
    return std::holds_alternative<ThresholdPredicate>(predicate_) ||
           std::holds_alternative<SumEqualsKPredicate>(predicate_);
}

bool BooleanFitnessFunction::satisfied_mask(std::uint32_t mask) const {
    return satisfied_by_mask(n_, predicate_, mask);
}

bool BooleanFitnessFunction::satisfied(const Genotype& x) const {
    if (x.size() != n_) throw_argument("genotype length mismatch");
    if (is_count_family()) {
        int plus = 0;
        for (int i = 0; i < n_; ++i) plus += x[i] > 0;
        return count_satisfied(plus);
    }
    return satisfied_mask(x.to_mask());
}

double BooleanFitnessFunction::evaluate(const Genotype& x) const {
    return landscape_.value(satisfied(x));
}

bool BooleanFitnessFunction::count_satisfied(int plus_count) const {
    if (const auto* th = std::get_if<ThresholdPredicate>(&predicate_))
        return plus_count >= th->min_plus_count(n_);
    if (const auto* se = std::get_if<SumEqualsKPredicate>(&predicate_))
        return plus_count == se->k;
    throw_argument("count_satisfied: not a count-family predicate");
}

BooleanFitnessFunction BooleanFitnessFunction::with_environment(int h) const {
    const auto* th = std::get_if<ThresholdPredicate>(&predicate_);
    if (th == nullptr)
        throw_argument("environment flag applies to threshold predicates only");
    ThresholdPredicate copy = *th;
    copy.env_h = h;
    return BooleanFitnessFunction(n_, copy, landscape_);
}

bool BooleanFitnessFunction::is_satisfiable() const {
    if (const auto* th = std::get_if<ThresholdPredicate>(&predicate_))
        return th->min_plus_count(n_) <= n_;
    if (std::holds_alternative<SumEqualsKPredicate>(predicate_)) return true;
    if (std::holds_alternative<TribesPredicate>(predicate_)) return true;
    if (std::holds_alternative<ParityPredicate>(predicate_)) return true;
    if (n_ > kMaxEnumerationN)
        throw_capability("satisfiability check by enumeration needs n <= 24");
    const SatTable& t = sat_table();
    for (std::uint64_t w : t.words)
        if (w != 0) return true;
    return false;
}

const SatTable& BooleanFitnessFunction::sat_table() const {
    if (n_ > kMaxEnumerationN)
        throw_capability("enumeration table limited to n <= 24");
    std::call_once(cache_->once, [this] {
        const std::size_t size = std::size_t(1) << n_;
        SatTable t;
        t.words.assign((size + 63) / 64, 0);
        if (const auto* tt = std::get_if<TruthTablePredicate>(&predicate_)) {
            t.words = tt->words;
        } else {
            for (std::size_t mask = 0; mask < size; ++mask) {
                if (satisfied_by_mask(n_, predicate_,
                                      static_cast<std::uint32_t>(mask)))
                    t.words[mask >> 6] |= std::uint64_t(1) << (mask & 63);
            }
        }
        cache_->table = std::move(t);
    });
    return cache_->table;
}

BooleanFitnessFunction BooleanFitnessFunction::from_truth_table_bits(
    int n, const std::vector<bool>& sat, FitnessLandscape landscape) {
    if (sat.size() != (std::size_t(1) << n))
        throw_argument("truth table length must be 2^n");
    TruthTablePredicate tt;
    tt.words.assign((sat.size() + 63) / 64, 0);
    for (std::size_t m = 0; m < sat.size(); ++m)
        if (sat[m]) tt.words[m >> 6] |= std::uint64_t(1) << (m & 63);
    return BooleanFitnessFunction(n, std::move(tt), landscape);
}

BooleanFitnessFunction BooleanFitnessFunction::and_function(
    int n, FitnessLandscape landscape) {
    return sum_equals_k(n, n, landscape);
}

BooleanFitnessFunction BooleanFitnessFunction::or_function(
    int n, FitnessLandscape landscape) {
    CnfPredicate cnf;
    cnf.clauses.emplace_back();
    for (int i = 1; i <= n; ++i) cnf.clauses[0].push_back(i);
    return BooleanFitnessFunction(n, std::move(cnf), landscape);
}

BooleanFitnessFunction BooleanFitnessFunction::parity(
    int n, FitnessLandscape landscape) {
    return BooleanFitnessFunction(n, ParityPredicate{}, landscape);
}

BooleanFitnessFunction BooleanFitnessFunction::majority(
    int n, FitnessLandscape landscape) {
    // min_plus_count = ceil((n+1)/2): strict majority of +1 alleles
    const int want = (n + 2) / 2;
    ThresholdPredicate th;
    th.env_h = 1;
    th.k = 2 * (n - want);
    if (th.k < 0 || th.k > n)
        throw_argument("majority unavailable at this n");
    return BooleanFitnessFunction(n, th, landscape);
}

BooleanFitnessFunction BooleanFitnessFunction::tribes(
    int width, int n_tribes, FitnessLandscape landscape) {
    return BooleanFitnessFunction(width * n_tribes, TribesPredicate{width},
                                  landscape);
}

BooleanFitnessFunction BooleanFitnessFunction::waddington(
    int n, int k, int h, FitnessLandscape landscape) {
    ThresholdPredicate th;
    th.k = k;
    th.env_h = h;
    return BooleanFitnessFunction(n, th, landscape);
}

BooleanFitnessFunction BooleanFitnessFunction::sum_equals_k(
    int n, int k, FitnessLandscape landscape) {
    return BooleanFitnessFunction(n, SumEqualsKPredicate{k}, landscape);
}

}  // namespace boolution
