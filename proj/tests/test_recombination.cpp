#include <doctest.h>

#include <cmath>

#include "boolution/dynamics.hpp"
#include "oracles.hpp"

using namespace boolution;

TEST_CASE("product distributions are fixed points of recombination") {
    CounterStream rng = stream_for(51, 0, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(4));
        const auto p = GenotypeDistribution::product(
            oracle::random_point(rng, n, 0.9));
        CHECK(p.linkage_disequilibrium() < 1e-14);
        const auto next = recombine_once(p);
        CHECK(next.linkage_disequilibrium() < 1e-12);
        for (std::size_t g = 0; g < p.probabilities().size(); ++g)
            CHECK(std::abs(next[g] - p[g]) < 1e-13);
    }
}

TEST_CASE("two-locus linkage disequilibrium halves exactly") {
    // p(++) = p(--) = 1/2
    GenotypeDistribution p({0.5, 0.0, 0.0, 0.5});
    CHECK(p.linkage_disequilibrium() == 0.25);
    double expected = 0.25;
    for (int t = 0; t < 20; ++t) {
        p = recombine_once(p);
        expected *= 0.5;
        CHECK(p.linkage_disequilibrium() == expected);  // dyadic, exact
        CHECK(p.marginal_mean(0) == 0.0);
        CHECK(p.marginal_mean(1) == 0.0);
    }
}

TEST_CASE("recombination preserves marginals exactly without selection") {
    CounterStream rng = stream_for(52, 0, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 3;
        std::vector<double> raw(8);
        double total = 0.0;
        for (double& v : raw) total += (v = rng.next_unit());
        for (double& v : raw) v /= total;
        // renormalize the largest entry so the mass check passes exactly
        double mass = 0.0;
        for (double v : raw) mass += v;
        raw[0] += 1.0 - mass;
        const GenotypeDistribution p0(raw);
        const auto f = BooleanFitnessFunction::parity(
            n, FitnessLandscape::weak_selection(0.01));
        const auto series = recombination_dynamics(f, p0, 10, false);
        for (int i = 0; i < n; ++i) {
            const double m0 = p0.marginal_mean(i);
            for (const auto& step : series)
                CHECK(std::abs(step.distribution.marginal_mean(i) - m0) <
                      1e-12);
        }
    }
}

TEST_CASE("weak selection keeps linkage disequilibrium near eps") {
    // fully correlated start, n = 3, eps = 0.01
    std::vector<double> raw(8, 0.0);
    raw.front() = 0.5;
    raw.back() = 0.5;
    const GenotypeDistribution p0(raw);
    const auto f = BooleanFitnessFunction::parity(
        3, FitnessLandscape::weak_selection(0.01));
    const auto series = recombination_dynamics(f, p0, 20, true);
    bool below = false;
    for (const auto& step : series)
        below = below || step.linkage_disequilibrium < 0.1;
    CHECK(below);
    CHECK(series.back().linkage_disequilibrium < 0.1);
}

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(GenotypeDistribution({0.5, 0.4}), Error);   // mass != 1
    CHECK_THROWS_AS(GenotypeDistribution({0.5, 0.5, 0.0}), Error);  // not 2^n
    CHECK_THROWS_AS(GenotypeDistribution({-0.1, 1.1}), Error);
    std::vector<double> big(std::size_t(1) << 9, 0.0);
    big[0] = 1.0;
    CHECK_THROWS_AS(GenotypeDistribution{big}, Error);  // n cap
}

TEST_CASE("lethal selection can annihilate the distribution") {
    const auto f = BooleanFitnessFunction::and_function(
        2, FitnessLandscape::lethal());
    GenotypeDistribution p({1.0, 0.0, 0.0, 0.0});  // mass on (-1,-1) only
    CHECK_THROWS_AS(recombination_dynamics(f, p, 1, true), Error);
}
