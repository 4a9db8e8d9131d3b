#include <doctest.h>

#include <cmath>

#include "boolution/verification.hpp"
#include "oracles.hpp"

using namespace boolution;

namespace {
const FitnessLandscape kWeak01 = FitnessLandscape::weak_selection(0.1);

BooleanFitnessFunction constant_function(int n, double eps) {
    return BooleanFitnessFunction::from_truth_table_bits(
        n, std::vector<bool>(std::size_t(1) << n, true),
        FitnessLandscape::weak_selection(eps));
}

BooleanFitnessFunction dictator(int n, double eps) {
    // satisfied iff locus 0 carries +1
    std::vector<bool> sat(std::size_t(1) << n);
    for (std::size_t m = 0; m < sat.size(); ++m) sat[m] = m & 1u;
    return BooleanFitnessFunction::from_truth_table_bits(
        n, sat, FitnessLandscape::weak_selection(eps));
}
}  // namespace

TEST_CASE("density gap") {
    const auto and2 = BooleanFitnessFunction::and_function(2, kWeak01);

    // vertex: nothing moves, gap is zero
    CHECK(density_gap(and2, ProductPoint::vertex(Genotype({1, -1}))) == 0.0);

    // worked value at the center: [ext(mu') - ext(nu)] - 0.8 * 2 (eps/4)^2
    const double mu_after = 0.025 / 1.025;
    const double expected =
        (1.0 + 0.025 * (1 + mu_after) * (1 + mu_after) - 1.025) -
        0.8 * 2 * 0.025 * 0.025;
    CHECK(density_gap(and2, ProductPoint::uniform(2)) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(density_gap(and2, ProductPoint::uniform(2)) > 0.0);

    // parity at the center: both sides exactly zero
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    CHECK(density_gap(parity2, ProductPoint::uniform(2)) == 0.0);

    // preconditions
    const auto strong = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.6));
    CHECK_THROWS_AS(density_gap(strong, ProductPoint::uniform(2)), Error);
    const auto lethal = BooleanFitnessFunction::and_function(
        2, FitnessLandscape::lethal());
    CHECK_THROWS_AS(density_gap(lethal, ProductPoint::uniform(2)), Error);

    // nonnegative across random instances
    CounterStream rng = stream_for(61, 0, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(4));
        const auto f = oracle::random_table(rng, n, 0.9 / (2 * n));
        CHECK(density_gap(f, oracle::random_point(rng, n, 0.99)) >= -1e-10);
    }
}

TEST_CASE("hybrid derivative expansion") {
    // no pairwise interactions: both bracketed terms vanish
    const auto d = dictator(3, 0.2);
    const auto nu = ProductPoint({0.2, -0.3, 0.4});
    CHECK(std::abs(hybrid_derivative_residual(d, nu, 1)) < 1e-15);
    CHECK(std::abs(hybrid_derivative_residual(d, nu, 2)) < 1e-15);

    // AND2 at the center: exact identity for pairwise-only functions
    const auto and2 = BooleanFitnessFunction::and_function(2, kWeak01);
    CHECK(std::abs(hybrid_derivative_residual(
              and2, ProductPoint::uniform(2), 1)) < 1e-14);

    // random truth tables drawn with tiny epsilon: the neglected terms are
    // cubic in the selection strength
    CounterStream rng = stream_for(62, 0, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 4;
        const auto f = oracle::random_table(rng, n, 1e-4);
        const auto p = oracle::random_point(rng, n, 0.9);
        const int locus = 1 + static_cast<int>(rng.next_below(n - 1));
        worst = std::max(worst,
                         std::abs(hybrid_derivative_residual(f, p, locus)));
    }
    CHECK(worst < 1e-9);

    CHECK_THROWS_AS(
        hybrid_derivative_residual(and2, ProductPoint::uniform(2), 0), Error);
}

TEST_CASE("variance-noise: exact grid") {
    // n = 1 dictator, mu = 0, N = 2: equality at eps^2/8
    const auto d1 = dictator(1, 0.1);
    const auto vn = variance_noise_exact(d1, ProductPoint::uniform(1), 2);
    CHECK(vn.grid_points == 3);
    CHECK(vn.lhs == doctest::Approx(0.1 * 0.1 / 8).epsilon(1e-13));
    CHECK(vn.rhs == doctest::Approx(0.1 * 0.1 / 8).epsilon(1e-13));
    CHECK(std::abs(vn.lhs - vn.rhs) < 1e-15);

    // constant function: both sides zero
    const auto c = constant_function(2, 0.2);
    const auto cz = variance_noise_exact(c, ProductPoint::uniform(2), 4);
    CHECK(cz.lhs == 0.0);
    CHECK(cz.rhs == 0.0);

    // parity over the 25-point grid: strict inequality
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    const auto pv = variance_noise_exact(parity2, ProductPoint::uniform(2), 4);
    CHECK(pv.grid_points == 25);
    CHECK(pv.lhs < pv.rhs);
    CHECK(pv.lhs > 0.0);

    // random instances
    CounterStream rng = stream_for(63, 0, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(3));
        const auto f = oracle::random_table(rng, n, rng.next_in(0.02, 0.3));
        const int big_n = 2 + static_cast<int>(rng.next_below(20));
        const auto chk =
            variance_noise_exact(f, oracle::random_point(rng, n, 0.9), big_n);
        CHECK(chk.lhs <= chk.rhs + 1e-12);
    }

    // grid cap: capability error and a usable Monte Carlo fallback
    const auto parity4 = BooleanFitnessFunction::parity(
        4, FitnessLandscape::weak_selection(0.1));
    CHECK_THROWS_AS(
        variance_noise_exact(parity4, ProductPoint::uniform(4), 100), Error);
    const auto mc = variance_noise_monte_carlo(
        d1, ProductPoint::uniform(1), 2, 20000, 9);
    CHECK(std::abs(mc.lhs - 0.1 * 0.1 / 8) < 4 * mc.lhs_se + 1e-12);
}

TEST_CASE("noise-fitness: exact grid") {
    const auto c = constant_function(2, 0.2);
    const auto cz = noise_fitness_check(c, ProductPoint::uniform(2), 4);
    CHECK(cz.lhs == 0.0);
    CHECK(std::abs(cz.rhs) < 1e-15);

    const auto and2 = BooleanFitnessFunction::and_function(
        2, FitnessLandscape::weak_selection(0.05));
    const auto av = noise_fitness_check(and2, ProductPoint::uniform(2), 6);
    CHECK(av.grid_points == 49);
    CHECK(av.lhs <= av.rhs + 1e-12);

    // parity: the linear coefficients vanish at mu, yet sampling creates
    // linear mass and the right side is strictly positive
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.05));
    const auto pv = noise_fitness_check(parity2, ProductPoint::uniform(2), 6);
    CHECK(pv.rhs > 0.0);
    CHECK(pv.lhs <= pv.rhs + 1e-12);
}

TEST_CASE("phi moments") {
    const auto m04 = phi_moments(ProductPoint({0.0}), 4, 0);
    CHECK(m04.second_moment == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(m04.variance_ratio == doctest::Approx(0.75).epsilon(1e-14));

    const auto m6 = phi_moments(ProductPoint({0.6}), 10, 0);
    CHECK(m6.second_moment == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(m6.variance_ratio == doctest::Approx(0.9).epsilon(1e-12));

    const auto m1 = phi_moments(ProductPoint({0.3}), 1, 0);
    CHECK(m1.second_moment == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m1.variance_ratio == doctest::Approx(0.0).epsilon(1e-13));

    CHECK_THROWS_AS(phi_moments(ProductPoint({1.0}), 4, 0), Error);
}

TEST_CASE("conditional sampling variance closed form") {
    // dictator: only the singleton coefficient eps/2 contributes, weight 1/N
    const auto d1 = dictator(1, 0.1);
    CHECK(conditional_sampling_variance(d1, ProductPoint::uniform(1), 2) ==
          doctest::Approx(0.1 * 0.1 / 8).epsilon(1e-14));

    // cross-check against the exact grid second moment
    CounterStream rng = stream_for(64, 0, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(2));
        const auto f = oracle::random_table(rng, n, 0.2);
        const auto mu = oracle::random_point(rng, n, 0.8);
        const int big_n = 2 + static_cast<int>(rng.next_below(10));
        const double closed = conditional_sampling_variance(f, mu, big_n);
        const auto grid = variance_noise_exact(f, mu, big_n);
        CHECK(closed == doctest::Approx(grid.lhs).epsilon(1e-10));
    }
}

TEST_CASE("martingale ledger") {
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));

    // constant function: everything is exactly zero
    const auto c = constant_function(2, 0.2);
    RunOptions opt;
    opt.early_stop = false;
    const auto flat = run_finite(c, ProductPoint::uniform(2), 10, 20, 3, opt);
    const auto zl = martingale_accumulate(flat);
    CHECK(zl.s_total == 0.0);
    CHECK(zl.m_total == 0.0);
    CHECK(zl.v_total == 0.0);

    // one generation of the n = 1 dictator at N = 2: V_1 = eps^2/8 exactly
    const auto d1 = dictator(1, 0.1);
    const auto one = run_finite(d1, ProductPoint::uniform(1), 2, 1, 5, opt);
    const auto ol = martingale_accumulate(one);
    CHECK(ol.exact_conditional);
    CHECK(ol.v_total == doctest::Approx(0.1 * 0.1 / 8).epsilon(1e-14));

    // constants follow the stated formulas
    const auto t = run_finite(parity2, ProductPoint::uniform(2), 50, 40, 1);
    const auto ledger = martingale_accumulate(t, true);
    const double eps = 0.2, ne = 2 * eps;
    CHECK(ledger.beta_lemma ==
          doctest::Approx(std::sqrt(2 * eps / (49 * (1 - ne)))));
    CHECK(ledger.alpha_lemma ==
          doctest::Approx(std::sqrt(2 * ledger.beta_lemma *
                                    std::log(2 / ledger.beta_lemma))));
    CHECK(ledger.beta_theorem ==
          doctest::Approx(std::sqrt(eps / (50 * (1 - ne)))));
    CHECK(ledger.zeta.size() == 40);  // padded to the requested horizon
    CHECK(ledger.h_total == ledger.m_total + ledger.v_total);

    // ensemble mean of S_T within 4 standard errors of zero
    const int seeds = 1000;
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
        const auto traj = run_finite(parity2, ProductPoint::uniform(2), 50,
                                     200, static_cast<std::uint64_t>(s));
        const double st = martingale_accumulate(traj).s_total;
        sum += st;
        sum_sq += st * st;
    }
    const double mean = sum / seeds;
    const double var = sum_sq / seeds - mean * mean;
    const double se = std::sqrt(std::max(var, 1e-30) / seeds);
    CHECK(std::abs(mean) < 4 * se);

    // ledgers need complete per-step records
    RunOptions thin;
    thin.record_every = 5;
    const auto sparse =
        run_finite(parity2, ProductPoint::uniform(2), 20, 40, 2, thin);
    CHECK_THROWS_AS(martingale_accumulate(sparse), Error);
}

TEST_CASE("lin-mu identity at realized samples") {
    CounterStream rng = stream_for(65, 0, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2;
        const auto f = oracle::random_table(rng, n, 0.2);
        const auto mu = oracle::random_point(rng, n, 0.7);
        const auto nu =
            sampling_step(mu, 8, trial, 0).to_product_point().mu();
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(lin_mu_residual(f, mu, nu, i)) < 1e-12);
    }
}

TEST_CASE("determined tracker") {
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));

    // starting at a vertex: absorbed at t = 0
    const auto at_vertex = run_finite(
        parity2, ProductPoint::vertex(Genotype({1, -1})), 20, 10, 3);
    const auto tv = determined_report(at_vertex);
    CHECK(tv.terminal_vertex);
    CHECK(tv.absorbed_time[0] == 0);
    CHECK(tv.absorbed_time[1] == 0);
    CHECK(tv.determined_time[0] == 0);

    // every run absorbs and stays absorbed
    int absorbed = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto traj =
            run_finite(parity2, ProductPoint::uniform(2), 50, 100000, seed);
        const auto rep = determined_report(traj);
        CHECK(rep.absorption_consistent);
        absorbed += traj.fixed;
    }
    CHECK(absorbed == 100);

    // Markov bound at an alpha-determined locus: fixation failure is rare
    const int n = 2, big_n = 50;
    const double alpha = 1.0 / (n * n * big_n);
    const double mu_j = 1.0 - alpha / 2;
    CHECK(non_fixation_probability(mu_j, big_n) <= 1.0 / (n * n));
    int not_fixed = 0;
    const int draws = 10000;
    for (int s = 0; s < draws; ++s) {
        const auto nu = sampling_step(ProductPoint({mu_j}), big_n,
                                      static_cast<std::uint64_t>(s), 0);
        if (!nu.locus_fixed(0)) ++not_fixed;
    }
    const double p_hat = not_fixed / static_cast<double>(draws);
    const double se = std::sqrt(p_hat * (1 - p_hat) / draws) + 1e-9;
    CHECK(p_hat <= 1.0 / (n * n) + 4 * se);

    // diagnostics from the fast-vertex argument
    CHECK(fast_vertex_t1(50, 2) == doctest::Approx(16.0 * 2500 * 16));
    CHECK(fast_vertex_t2(50, 2, 0.2) ==
          doctest::Approx(8.0 * 0.2 * 2500 * 16 / 0.6));
}
