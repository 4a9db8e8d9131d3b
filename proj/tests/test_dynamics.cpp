#include <doctest.h>

#include <cmath>

#include "boolution/dynamics.hpp"
#include "boolution/io.hpp"
#include "oracles.hpp"

using namespace boolution;

namespace {
const FitnessLandscape kWeak01 = FitnessLandscape::weak_selection(0.1);

BooleanFitnessFunction constant_function(int n, double eps) {
    return BooleanFitnessFunction::from_truth_table_bits(
        n, std::vector<bool>(std::size_t(1) << n, true),
        FitnessLandscape::weak_selection(eps));
}
}  // namespace

TEST_CASE("selection step") {
    // constant fitness moves nothing
    const auto c = constant_function(3, 0.2);
    const ProductPoint mu({0.3, -0.5, 0.0});
    const auto fixed = selection_step(c, mu);
    for (int i = 0; i < 3; ++i)
        CHECK(fixed[i] == doctest::Approx(mu[i]).epsilon(1e-15));

    // parity at the center is exactly stationary
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    const auto stay = selection_step(parity2, ProductPoint::uniform(2));
    CHECK(stay[0] == 0.0);
    CHECK(stay[1] == 0.0);

    // AND2: mu' = (eps/4) / (1 + eps/4)
    const auto and2 = BooleanFitnessFunction::and_function(2, kWeak01);
    const auto up = selection_step(and2, ProductPoint::uniform(2));
    CHECK(up[0] == doctest::Approx(0.025 / 1.025).epsilon(1e-15));
    CHECK(up[1] == doctest::Approx(0.025 / 1.025).epsilon(1e-15));

    // oracle cross-check on random instances
    CounterStream rng = stream_for(41, 0, 0);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(6));
        const auto f = oracle::random_table(rng, n, rng.next_in(0.05, 0.4));
        const auto p = oracle::random_point(rng, n, 0.9);
        const auto got = selection_step(f, p);
        const double mean = oracle::extension(f, p);
        for (int i = 0; i < n; ++i)
            CHECK(got[i] == doctest::Approx(oracle::mean_fx(f, p, i) / mean)
                                .epsilon(1e-12));
    }

    // lethal extinction
    const auto lethal_and = BooleanFitnessFunction::and_function(
        2, FitnessLandscape::lethal());
    CHECK_THROWS_AS(
        selection_step(lethal_and, ProductPoint::vertex(Genotype({-1, -1}))),
        Error);
}

TEST_CASE("sampling step") {
    // degenerate marginals stay put
    const auto nu = sampling_step(ProductPoint({1.0, -1.0, 0.0}), 8, 5, 0);
    CHECK(nu.plus_count(0) == 8);
    CHECK(nu.plus_count(1) == 0);
    CHECK(nu.nu(0) == 1.0);
    CHECK(nu.nu(1) == -1.0);

    // p = 0, N = 4: frequencies of each grid value match (1,4,6,4,1)/16
    const int draws = 200000;
    int histogram[5] = {0, 0, 0, 0, 0};
    for (int s = 0; s < draws; ++s) {
        const auto v = sampling_step(ProductPoint::uniform(1), 4,
                                     static_cast<std::uint64_t>(s), 0);
        histogram[v.plus_count(0)]++;
    }
    const double expected[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16,
                                1.0 / 16};
    for (int k = 0; k <= 4; ++k) {
        const double p = expected[k];
        const double se = std::sqrt(p * (1 - p) / draws);
        CHECK(std::abs(histogram[k] / static_cast<double>(draws) - p) <
              4 * se);
    }

    // marginal preservation: mean of nu_i within 4 SE of mu_i
    const double mu_i = 0.37;
    const int big_n = 25;
    double total = 0.0;
    const int reps = 100000;
    for (int s = 0; s < reps; ++s)
        total += sampling_step(ProductPoint({mu_i}), big_n,
                               static_cast<std::uint64_t>(s), 1)
                     .nu(0);
    const double se = std::sqrt((1 - mu_i * mu_i) / big_n / reps);
    CHECK(std::abs(total / reps - mu_i) < 4 * se);

    // reproducibility: the same (seed, generation, locus) redraws identically
    const auto a = sampling_step(ProductPoint::uniform(3), 10, 99, 7);
    const auto b = sampling_step(ProductPoint::uniform(3), 10, 99, 7);
    for (int i = 0; i < 3; ++i) CHECK(a.plus_count(i) == b.plus_count(i));
}

TEST_CASE("generation composition") {
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    // N = 1: the sample is a vertex and selection cannot move it
    const auto g = generation(parity2, ProductPoint::uniform(2), 1, 3, 0);
    CHECK(g.nu.is_vertex());
    for (int i = 0; i < 2; ++i) CHECK(g.mu_after[i] == g.nu.nu(i));

    // constant fitness: mu' = nu for any draw
    const auto c = constant_function(2, 0.3);
    const auto gc = generation(c, ProductPoint::uniform(2), 6, 4, 0);
    for (int i = 0; i < 2; ++i)
        CHECK(gc.mu_after[i] == doctest::Approx(gc.nu.nu(i)).epsilon(1e-15));
}

TEST_CASE("infinite process") {
    // parity from the center never moves
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    const auto traj = run_infinite(parity2, ProductPoint::uniform(2), 50);
    CHECK(traj.steps_taken == 50);
    for (const auto& rec : traj.records) {
        CHECK(rec.mu_before[0] == 0.0);
        CHECK(rec.mu_before[1] == 0.0);
        CHECK(rec.sat_prob == 0.5);
    }
    CHECK(traj.terminal_mu[0] == 0.0);

    // sum-equals-k at its stationary point
    const auto sum42 = BooleanFitnessFunction::sum_equals_k(
        4, 2, FitnessLandscape::weak_selection(0.2));
    const auto stay = run_infinite(sum42, ProductPoint::uniform(4), 100);
    for (double v : stay.terminal_mu) CHECK(v == 0.0);

    // AND2 climbs monotonically in every coordinate
    const auto and2 = BooleanFitnessFunction::and_function(2, kWeak01);
    const auto climb = run_infinite(and2, ProductPoint::uniform(2), 100);
    double prev = -1.0;
    for (const auto& rec : climb.records) {
        CHECK(rec.mu_before[0] > prev);
        prev = rec.mu_before[0];
        CHECK(rec.mu_before[0] == doctest::Approx(rec.mu_before[1]));
    }

    // selection never decreases the extension (n*eps < 1)
    for (const auto& rec : climb.records)
        CHECK(rec.selection_increment >= -1e-12);
}

TEST_CASE("finite process basics") {
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));

    // T = 0: trajectory is just mu0
    const auto empty = run_finite(parity2, ProductPoint::uniform(2), 10, 0, 1);
    CHECK(empty.steps_taken == 0);
    CHECK(empty.records.empty());
    CHECK(empty.terminal_mu[0] == 0.0);

    // starting at a satisfying vertex: fixed at t = 0, extension 1 + eps
    const auto vertex_start = run_finite(
        parity2, ProductPoint::vertex(Genotype({1, -1})), 10, 5, 1);
    CHECK(vertex_start.fixed);
    CHECK(vertex_start.fixation_time == 0);
    CHECK(vertex_start.fixation_value == doctest::Approx(1.2));

    // reproducibility: identical seeds, identical trajectories
    const auto t1 = run_finite(parity2, ProductPoint::uniform(2), 20, 100, 42);
    const auto t2 = run_finite(parity2, ProductPoint::uniform(2), 20, 100, 42);
    REQUIRE(t1.records.size() == t2.records.size());
    for (std::size_t i = 0; i < t1.records.size(); ++i) {
        CHECK(t1.records[i].nu == t2.records[i].nu);
        CHECK(t1.records[i].mu_after == t2.records[i].mu_after);
    }

    // vertex absorption: once fixed, later generations cannot move
    auto fixed_run =
        run_finite(parity2, ProductPoint::uniform(2), 20, 100000, 7);
    REQUIRE(fixed_run.fixed);
    ProductPoint terminal(fixed_run.terminal_mu);
    REQUIRE(terminal.is_vertex());
    for (long extra = 0; extra < 5; ++extra) {
        const auto g = generation(parity2, terminal, 20, 7,
                                  100000 + extra);
        CHECK(g.nu.is_vertex());
        for (int i = 0; i < 2; ++i)
            CHECK(g.mu_after[i] == terminal[i]);
        terminal = g.mu_after;
    }
}

TEST_CASE("no-early-stop keeps sampling after absorption") {
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    RunOptions opt;
    opt.early_stop = false;
    const auto traj = run_finite(parity2, ProductPoint::uniform(2), 10, 300,
                                 11, opt);
    CHECK(traj.steps_taken == 300);
    REQUIRE(traj.fixed);
    // after the fixation time every record is the absorbed vertex
    for (const auto& rec : traj.records) {
        if (rec.t > traj.fixation_time) {
            for (double v : rec.nu) CHECK(std::abs(v) == 1.0);
            CHECK(rec.sampling_increment == 0.0);
        }
    }
}

TEST_CASE("lethal extinction is recorded, not thrown") {
    // lethal AND2 with a tiny population often draws no satisfying state
    const auto lethal_and = BooleanFitnessFunction::and_function(
        2, FitnessLandscape::lethal());
    int extinct = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto traj = run_finite(lethal_and, ProductPoint({-0.8, -0.8}),
                                     2, 50, seed);
        if (traj.extinct) {
            ++extinct;
            CHECK(traj.extinction_time >= 0);
        }
    }
    CHECK(extinct > 0);
}

TEST_CASE("waddington scenario worked values") {
    // infinite-population lethal run, n = 10, k = 3
    std::vector<int> schedule(3, 1);
    const auto rows = waddington_scenario(10, 3, schedule,
                                          FitnessLandscape::lethal(),
                                          WaddingtonMode::infinite(),
                                          ProductPoint::uniform(10));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].sat_heat == doctest::Approx(11.0 / 1024).epsilon(1e-13));
    CHECK(rows[0].sat_normal == doctest::Approx(1.0 / 1024).epsilon(1e-13));

    // after one lethal selection under heat: mu_i = 9/11 exactly
    for (double v : rows[1].mu)
        CHECK(v == doctest::Approx(9.0 / 11.0).epsilon(1e-14));

    // next-generation satisfaction: P(Bin(10, 10/11) >= 9)
    CHECK(rows[1].sat_heat ==
          doctest::Approx(oracle::binomial_tail(10, 10.0 / 11.0, 9))
              .epsilon(1e-12));
}

TEST_CASE("finite sampling escapes a spurious fixpoint") {
    // the infinite dynamics stays at mu = 0 forever; every finite run
    // escapes through sampling noise and fixes at a vertex
    const auto sum42 = BooleanFitnessFunction::sum_equals_k(
        4, 2, FitnessLandscape::weak_selection(0.2));
    const auto stuck = run_infinite(sum42, ProductPoint::uniform(4), 50);
    for (double v : stuck.terminal_mu) CHECK(v == 0.0);

    int fixed = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto traj =
            run_finite(sum42, ProductPoint::uniform(4), 30, 100000, seed);
        fixed += traj.fixed;
    }
    CHECK(fixed == 20);
}

TEST_CASE("environment flag rejected off threshold predicates") {
    const auto parity2 = BooleanFitnessFunction::parity(2, kWeak01);
    CHECK_THROWS_AS(parity2.with_environment(1), Error);
}

TEST_CASE("theorem bound holds on a short AND2 run") {
    const auto and2 = BooleanFitnessFunction::and_function(2, kWeak01);
    const double sat0 =
        satisfaction_probability(and2, ProductPoint::uniform(2));
    const auto traj = run_infinite(and2, ProductPoint::uniform(2), 2000);
    for (const auto& rec : traj.records) {
        if (rec.t == 0) continue;
        const double bound =
            1.0 - 2 * 1.1 / (0.1 * static_cast<double>(rec.t) * sat0);
        CHECK(rec.sat_prob >= bound);
    }
}
