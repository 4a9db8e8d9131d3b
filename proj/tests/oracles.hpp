#pragma once

// Brute-force oracles for the test suite.  Everything here goes straight
// from the definitions: explicit loops over all genotype masks (and, for the
// sampling lemmas, over binomial grids), no shared code with the library's
// kernel or DP paths beyond pointwise evaluate().

#include <cmath>
#include <cstdint>
#include <vector>

#include "boolution/function.hpp"
#include "boolution/rng.hpp"
#include "boolution/types.hpp"

namespace oracle {

using boolution::BooleanFitnessFunction;
using boolution::CounterStream;
using boolution::FitnessLandscape;
using boolution::Genotype;
using boolution::ProductPoint;

inline double point_weight(const ProductPoint& mu, std::uint32_t mask) {
    double w = 1.0;
    for (int i = 0; i < mu.size(); ++i)
        w *= ((mask >> i) & 1u) ? 0.5 * (1.0 + mu[i]) : 0.5 * (1.0 - mu[i]);
    return w;
}

inline double extension(const BooleanFitnessFunction& f,
                        const ProductPoint& mu) {
    long double total = 0.0L;
    for (std::uint32_t m = 0; m < (1u << f.n()); ++m)
        total += static_cast<long double>(point_weight(mu, m)) *
                 f.evaluate(Genotype::from_mask(m, f.n()));
    return static_cast<double>(total);
}

inline double sat_probability(const BooleanFitnessFunction& f,
                              const ProductPoint& mu) {
    long double total = 0.0L;
    for (std::uint32_t m = 0; m < (1u << f.n()); ++m)
        if (f.satisfied(Genotype::from_mask(m, f.n())))
            total += point_weight(mu, m);
    return static_cast<double>(total);
}

inline double phi(const std::vector<int>& subset, const ProductPoint& mu,
                  std::uint32_t mask) {
    double v = 1.0;
    for (int i : subset) {
        const double x = ((mask >> i) & 1u) ? 1.0 : -1.0;
        v *= (x - mu[i]) / mu.sigma(i);
    }
    return v;
}

inline double coefficient(const BooleanFitnessFunction& f,
                          const std::vector<int>& subset,
                          const ProductPoint& mu) {
    long double total = 0.0L;
    for (std::uint32_t m = 0; m < (1u << f.n()); ++m)
        total += static_cast<long double>(point_weight(mu, m)) *
                 f.evaluate(Genotype::from_mask(m, f.n())) *
                 phi(subset, mu, m);
    return static_cast<double>(total);
}

inline double mean_fx(const BooleanFitnessFunction& f, const ProductPoint& mu,
                      int locus) {
    long double total = 0.0L;
    for (std::uint32_t m = 0; m < (1u << f.n()); ++m) {
        const double x = ((m >> locus) & 1u) ? 1.0 : -1.0;
        total += static_cast<long double>(point_weight(mu, m)) *
                 f.evaluate(Genotype::from_mask(m, f.n())) * x;
    }
    return static_cast<double>(total);
}

inline double central_difference(const BooleanFitnessFunction& f,
                                 const ProductPoint& mu, int locus,
                                 double step) {
    const auto up = mu.with_coordinate(locus, mu[locus] + step);
    const auto down = mu.with_coordinate(locus, mu[locus] - step);
    return (oracle::extension(f, up) - oracle::extension(f, down)) /
           (2.0 * step);
}

// Exact C(n, k) as a double (exact for the small n used in tests).
inline double binomial(int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
    return v;
}

// P[Bin(n, p) >= c]
inline double binomial_tail(int n, double p, int c) {
    long double total = 0.0L;
    for (int j = std::max(c, 0); j <= n; ++j)
        total += static_cast<long double>(binomial(n, j)) *
                 std::pow(p, j) * std::pow(1.0 - p, n - j);
    return static_cast<double>(total);
}

// ---- random instances ------------------------------------------------------

inline BooleanFitnessFunction random_table(CounterStream& rng, int n,
                                           double eps) {
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

// Random monotone function: an OR of positive-literal terms, closed upward.
inline BooleanFitnessFunction random_monotone(CounterStream& rng, int n,
                                              double eps) {
    const int terms = 1 + static_cast<int>(rng.next_below(3));
    std::vector<std::uint32_t> minterms;
    for (int t = 0; t < terms; ++t) {
        std::uint32_t m = 0;
        for (int i = 0; i < n; ++i)
            if (rng.next_unit() < 0.5) m |= 1u << i;
        if (m == 0) m = 1u << rng.next_below(static_cast<std::uint64_t>(n));
        minterms.push_back(m);
    }
    std::vector<bool> sat(std::size_t(1) << n, false);
    for (std::uint32_t g = 0; g < (1u << n); ++g)
        for (std::uint32_t t : minterms)
            if ((g & t) == t) sat[g] = true;
    return BooleanFitnessFunction::from_truth_table_bits(
        n, sat, FitnessLandscape::weak_selection(eps));
}

inline ProductPoint random_point(CounterStream& rng, int n, double radius) {
    std::vector<double> mu(static_cast<std::size_t>(n));
    for (double& v : mu) v = rng.next_in(-radius, radius);
    return ProductPoint(std::move(mu));
}

}  // namespace oracle
