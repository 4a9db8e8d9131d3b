#include "boolution/verification.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "boolution/rng.hpp"

namespace boolution {
namespace {

struct Neumaier {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

void require_weak_small(const BooleanFitnessFunction& f, const char* what) {
    if (!f.landscape().is_weak())
        throw_precondition(std::string(what) + " requires weak selection");
    if (f.n() * f.landscape().epsilon() >= 1.0)
        throw_precondition(std::string(what) + " requires n*eps < 1");
}

// Binomial(N, p) pmf; the recurrence keeps small cases (powers of 1/2 etc.)
// exact, with a log-space fallback when q^N underflows.
std::vector<double> binomial_pmf(int n_trials, double p) {
    std::vector<double> pmf(static_cast<std::size_t>(n_trials) + 1, 0.0);
    if (p <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p >= 1.0) {
        pmf[static_cast<std::size_t>(n_trials)] = 1.0;
        return pmf;
    }
    const double q = 1.0 - p;
    double q_pow = 1.0;
    for (int j = 0; j < n_trials; ++j) q_pow *= q;
    if (q_pow > 0.0) {
        pmf[0] = q_pow;
        const double ratio = p / q;
        for (int k = 0; k < n_trials; ++k)
            pmf[static_cast<std::size_t>(k) + 1] =
                pmf[static_cast<std::size_t>(k)] * ratio *
                (static_cast<double>(n_trials - k) / (k + 1));
        return pmf;
    }
    const double lp = std::log(p), lq = std::log(q);
    const double lg_n = std::lgamma(n_trials + 1.0);
    for (int k = 0; k <= n_trials; ++k) {
        pmf[static_cast<std::size_t>(k)] =
            std::exp(lg_n - std::lgamma(k + 1.0) -
                     std::lgamma(n_trials - k + 1.0) + k * lp +
                     (n_trials - k) * lq);
    }
    return pmf;
}

// Walks the whole per-coordinate binomial grid, calling
// visit(weight, nu_values, plus_counts) at every point.
template <typename Visit>
long walk_sampling_grid(const ProductPoint& mu, int sample_size,
                        Visit&& visit) {
    const int n = mu.size();
    const double points =
        std::pow(static_cast<double>(sample_size) + 1.0, n);
    if (points > kMaxGridPoints)
        throw_capability("sampling grid too large for exact enumeration");

    std::vector<std::vector<double>> pmf(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pmf[static_cast<std::size_t>(i)] = binomial_pmf(sample_size,
                                                        mu.p_plus(i));

    std::vector<int> k(static_cast<std::size_t>(n), 0);
    std::vector<double> nu(static_cast<std::size_t>(n));
    std::vector<double> partial(static_cast<std::size_t>(n) + 1, 1.0);
    auto refresh_from = [&](int level) {
        for (int i = level; i < n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            partial[ii + 1] = partial[ii] * pmf[ii][static_cast<std::size_t>(k[ii])];
            nu[ii] = 2.0 * k[ii] / sample_size - 1.0;
        }
    };
    refresh_from(0);

    long count = 0;
    while (true) {
        visit(partial[static_cast<std::size_t>(n)], nu, k);
        ++count;
        int i = n - 1;
        while (i >= 0 && k[static_cast<std::size_t>(i)] == sample_size) {
            k[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
        ++k[static_cast<std::size_t>(i)];
        refresh_from(i);
    }
    return count;
}

// f^(i;nu) for every locus from one moments sweep; vertex coordinates
// contribute zero.
std::vector<double> linear_from_moments(const SelectionMoments& m,
                                        const std::vector<double>& nu) {
    std::vector<double> lin(nu.size(), 0.0);
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const double ssq = (1.0 - nu[i]) * (1.0 + nu[i]);
        if (ssq == 0.0) continue;
        lin[i] = (m.mean_fx[i] - nu[i] * m.mean_fitness) / std::sqrt(ssq);
    }
    return lin;
}

}  // namespace

double density_gap(const BooleanFitnessFunction& f, const ProductPoint& nu) {
    require_weak_small(f, "density gap");
    const SelectionDetail det = selection_step_detail(f, nu);
    const double ext_nu = det.mean_fitness;
    const double ext_after = extension(f, det.mu_after);
    const auto lin = linear_coefficients(f, nu);
    double mass = 0.0;
    for (double c : lin) mass += c * c;
    const double ne = f.n() * f.landscape().epsilon();
    return (ext_after - ext_nu) - (1.0 - ne) * mass;
}

double hybrid_derivative_residual(const BooleanFitnessFunction& f,
                                  const ProductPoint& nu, int locus) {
    if (locus < 1 || locus >= f.n())
        throw_argument("hybrid residual needs 1 <= locus < n");
    const SelectionDetail det = selection_step_detail(f, nu);

    std::vector<double> hybrid = nu.mu();
    for (int j = 0; j < locus; ++j)
        hybrid[static_cast<std::size_t>(j)] = det.mu_after[j];
    const ProductPoint w(std::move(hybrid));

    const double lhs = extension_gradient(f, w, locus) -
                       extension_gradient(f, nu, locus);

    const double sigma_i = nu.sigma(locus);
    if (sigma_i == 0.0) throw_degenerate("sigma = 0 at the probed locus");
    Neumaier sum;
    for (int j = 0; j < locus; ++j) {
        const double fj = coefficient(f, {j}, nu);
        const double fij = coefficient(f, {j, locus}, nu);
        sum.add(fj * fij);
    }
    const double rhs = sum.value() / (det.mean_fitness * sigma_i);
    return lhs - rhs;
}

GridCheck variance_noise_exact(const BooleanFitnessFunction& f,
                               const ProductPoint& mu, int sample_size) {
    if (sample_size < 2)
        throw_argument("variance-noise needs sample size >= 2");
    const double ext_mu = extension(f, mu);
    Neumaier lhs, rhs;
    const long points = walk_sampling_grid(
        mu, sample_size,
        [&](double weight, const std::vector<double>& nu,
            const std::vector<int>&) {
            if (weight == 0.0) return;
            const SelectionMoments m =
                selection_moments(f, ProductPoint(nu));
            const double d = m.mean_fitness - ext_mu;
            lhs.add(weight * d * d);
            const auto lin = linear_from_moments(m, nu);
            double mass = 0.0;
            for (double c : lin) mass += c * c;
            rhs.add(weight * mass);
        });
    return {lhs.value(), rhs.value() / (sample_size - 1), points};
}

GridCheck noise_fitness_check(const BooleanFitnessFunction& f,
                              const ProductPoint& mu, int sample_size) {
    require_weak_small(f, "noise-fitness check");
    if (sample_size < 2)
        throw_argument("noise-fitness needs sample size >= 2");
    const double ext_mu = extension(f, mu);
    const double ne = f.n() * f.landscape().epsilon();
    Neumaier lhs, gain;
    const long points = walk_sampling_grid(
        mu, sample_size,
        [&](double weight, const std::vector<double>& nu,
            const std::vector<int>&) {
            if (weight == 0.0) return;
            const SelectionMoments m =
                selection_moments(f, ProductPoint(nu));
            const double d = m.mean_fitness - ext_mu;
            lhs.add(weight * d * d);
            std::vector<double> after(nu.size());
            for (std::size_t i = 0; i < nu.size(); ++i)
                after[i] =
                    std::clamp(m.mean_fx[i] / m.mean_fitness, -1.0, 1.0);
            const double ext_after = extension(f, ProductPoint(after));
            gain.add(weight * (ext_after - m.mean_fitness));
        });
    const double rhs = gain.value() / ((sample_size - 1) * (1.0 - ne));
    return {lhs.value(), rhs, points};
}

MonteCarloCheck variance_noise_monte_carlo(const BooleanFitnessFunction& f,
                                           const ProductPoint& mu,
                                           int sample_size, long samples,
                                           std::uint64_t seed) {
    if (sample_size < 2)
        throw_argument("variance-noise needs sample size >= 2");
    if (samples < 2) throw_argument("need at least two Monte Carlo samples");
    const double ext_mu = extension(f, mu);
    Neumaier lhs, lhs2, rhs, rhs2;
    for (long s = 0; s < samples; ++s) {
        const auto nu =
            sampling_step(mu, sample_size, mix64(seed) ^ 0x5eedULL, s)
                .to_product_point();
        const SelectionMoments m = selection_moments(f, nu);
        const double d = m.mean_fitness - ext_mu;
        const auto lin = linear_from_moments(m, nu.mu());
        double mass = 0.0;
        for (double c : lin) mass += c * c;
        lhs.add(d * d);
        lhs2.add(d * d * d * d);
        rhs.add(mass);
        rhs2.add(mass * mass);
    }
    MonteCarloCheck out;
    out.samples = samples;
    const double inv = 1.0 / static_cast<double>(samples);
    out.lhs = lhs.value() * inv;
    out.rhs = rhs.value() * inv / (sample_size - 1);
    const double var_l =
        std::max(0.0, lhs2.value() * inv - out.lhs * out.lhs);
    const double raw_r = rhs.value() * inv;
    const double var_r =
        std::max(0.0, rhs2.value() * inv - raw_r * raw_r);
    out.lhs_se = std::sqrt(var_l * inv);
    out.rhs_se = std::sqrt(var_r * inv) / (sample_size - 1);
    return out;
}

PhiMoments phi_moments(const ProductPoint& mu, int sample_size, int locus) {
    if (locus < 0 || locus >= mu.size()) throw_argument("locus out of range");
    const double ssq = mu.sigma_sq(locus);
    if (ssq == 0.0) throw_degenerate("phi moments need |mu_i| < 1");
    const auto pmf = binomial_pmf(sample_size, mu.p_plus(locus));
    Neumaier second, var;
    for (int k = 0; k <= sample_size; ++k) {
        const double w = pmf[static_cast<std::size_t>(k)];
        const double nu = 2.0 * k / sample_size - 1.0;
        const double centered = nu - mu[locus];
        second.add(w * centered * centered);
        var.add(w * (1.0 - nu) * (1.0 + nu));
    }
    return {second.value() / ssq, var.value() / ssq};
}

double conditional_sampling_variance(const BooleanFitnessFunction& f,
                                     const ProductPoint& mu,
                                     int sample_size) {
    const FourierTable table(f, mu);
    const double inv_n = 1.0 / static_cast<double>(sample_size);
    Neumaier acc;
    const auto& c = table.coefficients();
    for (std::size_t s = 1; s < c.size(); ++s) {
        const int order = std::popcount(s);
        acc.add(c[s] * c[s] * std::pow(inv_n, order));
    }
    return acc.value();
}

double lin_mu_residual(const BooleanFitnessFunction& f, const ProductPoint& mu,
                       const std::vector<double>& nu, int locus) {
    if (nu.size() != static_cast<std::size_t>(f.n()))
        throw_argument("nu dimension mismatch");
    const ProductPoint nu_point(nu);
    const double s_nu = nu_point.sigma(locus);
    const double s_mu = mu.sigma(locus);
    if (s_mu == 0.0) throw_degenerate("base sigma = 0");
    const double direct =
        s_nu == 0.0 ? 0.0 : coefficient(f, {locus}, nu_point);

    const FourierTable table(f, mu);
    const int n = f.n();
    Neumaier acc;
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
        if (!((s >> locus) & 1u)) continue;
        std::vector<int> rest;
        for (int i = 0; i < n; ++i)
            if (i != locus && ((s >> i) & 1u)) rest.push_back(i);
        acc.add(table.at(s) * basis_value_at(rest, mu, nu));
    }
    return direct - (s_nu / s_mu) * acc.value();
}

MartingaleLedger martingale_accumulate(const Trajectory& trajectory,
                                       bool check_identities) {
    if (!trajectory.function)
        throw_argument("trajectory carries no function snapshot");
    const BooleanFitnessFunction& f = *trajectory.function;
    if (!trajectory.finite)
        throw_argument("martingale ledger needs a finite-population run");
    if (!f.landscape().is_weak())
        throw_argument("martingale constants are defined for weak selection");
    const double eps = f.landscape().epsilon();
    const double ne = f.n() * eps;
    if (ne >= 1.0) throw_precondition("martingale constants need n*eps < 1");
    if (trajectory.record_every != 1 ||
        static_cast<long>(trajectory.records.size()) != trajectory.steps_taken)
        throw_argument(
            "martingale ledger needs complete per-step records "
            "(record_every = 1)");
    if (trajectory.extinct)
        throw_argument("martingale ledger undefined after extinction");

    const int big_n = trajectory.sample_size;
    const bool exact = f.n() <= kMaxFullTableN;

    MartingaleLedger ledger;
    ledger.exact_conditional = exact;
    ledger.zeta.assign(static_cast<std::size_t>(trajectory.requested_steps),
                       0.0);
    Neumaier s, m, v;
    for (const StepRecord& rec : trajectory.records) {
        const double z = rec.sampling_increment;
        ledger.zeta[static_cast<std::size_t>(rec.t)] = z;
        s.add(z);
        m.add(z * z);
        if (exact) {
            v.add(conditional_sampling_variance(
                f, ProductPoint(rec.mu_before), big_n));
        } else {
            v.add(z * z);  // plug-in estimate, flagged via exact_conditional
        }
        if (check_identities && exact) {
            for (int i = 0; i < f.n(); ++i) {
                const double r = lin_mu_residual(
                    f, ProductPoint(rec.mu_before), rec.nu, i);
                if (std::abs(r) > 1e-9)
                    throw_precondition("lin-mu identity violated");
            }
        }
    }
    // Steps past an early stop contribute exactly zero: the absorbed state
    // samples to itself.
    ledger.s_total = s.value();
    ledger.m_total = m.value();
    ledger.v_total = v.value();
    ledger.h_total = ledger.m_total + ledger.v_total;

    ledger.beta_lemma = std::sqrt(2.0 * eps / ((big_n - 1) * (1.0 - ne)));
    ledger.alpha_lemma = std::sqrt(
        2.0 * ledger.beta_lemma * std::log(2.0 / ledger.beta_lemma));
    ledger.beta_theorem = std::sqrt(eps / (big_n * (1.0 - ne)));
    ledger.alpha_theorem = std::sqrt(
        2.0 * ledger.beta_theorem * std::log(2.0 / ledger.beta_theorem));
    return ledger;
}

DeterminedTracker determined_report(const Trajectory& trajectory,
                                    double alpha) {
    const int n = trajectory.n;
    DeterminedTracker tracker;
    if (alpha <= 0.0) {
        if (!trajectory.finite)
            throw_argument("default alpha needs a finite-population run");
        alpha = 1.0 / (static_cast<double>(n) * n * trajectory.sample_size);
    }
    tracker.alpha = alpha;
    tracker.determined_time.assign(static_cast<std::size_t>(n), -1);
    tracker.absorbed_time.assign(static_cast<std::size_t>(n), -1);

    std::vector<double> absorbed_value(static_cast<std::size_t>(n), 0.0);
    for (const StepRecord& rec : trajectory.records) {
        for (int j = 0; j < n; ++j) {
            const std::size_t jj = static_cast<std::size_t>(j);
            if (tracker.determined_time[jj] < 0 &&
                std::abs(rec.mu_before[jj]) > 1.0 - alpha)
                tracker.determined_time[jj] = rec.t;
            if (tracker.absorbed_time[jj] < 0) {
                if (std::abs(rec.nu[jj]) == 1.0) {
                    tracker.absorbed_time[jj] = rec.t;
                    absorbed_value[jj] = rec.nu[jj];
                }
            } else if (rec.nu[jj] != absorbed_value[jj]) {
                tracker.absorption_consistent = false;
            }
        }
    }
    tracker.terminal_vertex = true;
    for (double m : trajectory.terminal_mu)
        if (m != 1.0 && m != -1.0) tracker.terminal_vertex = false;
    return tracker;
}

double non_fixation_probability(double mu_j, int sample_size) {
    const double p = 0.5 * (1.0 + mu_j);
    double p_all = 1.0, q_all = 1.0;
    for (int j = 0; j < sample_size; ++j) {
        p_all *= p;
        q_all *= 1.0 - p;
    }
    return 1.0 - p_all - q_all;
}

double fast_vertex_t1(int sample_size, int n) {
    return 16.0 * std::pow(static_cast<double>(sample_size), 2) *
           std::pow(static_cast<double>(n), 4);
}

double fast_vertex_t2(int sample_size, int n, double epsilon) {
    return 8.0 * epsilon * std::pow(static_cast<double>(sample_size), 2) *
           std::pow(static_cast<double>(n), 4) / (1.0 - n * epsilon);
}

}  // namespace boolution
