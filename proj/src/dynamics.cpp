#include "boolution/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "boolution/rng.hpp"

namespace boolution {
namespace {

constexpr double kSelect2Guard = 1e-8;   // internal consistency bound
constexpr double kDensitySlack = 1e-9;   // runtime density assertion slack

bool enumeration_backend(const BooleanFitnessFunction& f,
                         EvalBackend backend) {
    return backend == EvalBackend::Enumeration ||
           (backend == EvalBackend::Auto && f.n() <= kMaxEnumerationN);
}

double linear_mass_of(const std::vector<double>& coeffs) {
    double total = 0.0;
    for (double c : coeffs) total += c * c;
    return total;
}

// E[f x_i]/E[f] lies in [-1,1] exactly, but the floating ratio can overshoot
// by an ulp near a vertex.
double unit_clamp(double v) { return std::clamp(v, -1.0, 1.0); }

// Density floor (1 - n*eps) * sum_i f^(i;nu)^2, meaningful when n*eps < 1.
void assert_density(const BooleanFitnessFunction& f, double selection_inc,
                    double linear_mass, long t) {
    if (!f.landscape().is_weak()) return;
    const double ne = f.n() * f.landscape().epsilon();
    if (ne >= 1.0) return;
    if (selection_inc < (1.0 - ne) * linear_mass - kDensitySlack)
        throw_precondition(
            "density inequality violated at generation " + std::to_string(t));
}

}  // namespace

EmpiricalFrequencies::EmpiricalFrequencies(std::vector<int> plus_counts,
                                           int sample_size)
    : counts_(std::move(plus_counts)), sample_size_(sample_size) {
    if (sample_size_ < 1) throw_argument("sample size must be >= 1");
    for (int c : counts_)
        if (c < 0 || c > sample_size_)
            throw_argument("plus count outside [0, N]");
}

ProductPoint EmpiricalFrequencies::to_product_point() const {
    std::vector<double> mu(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i)
        mu[i] = nu(static_cast<int>(i));
    return ProductPoint(std::move(mu));
}

SelectionDetail selection_step_detail(const BooleanFitnessFunction& f,
                                      const ProductPoint& p,
                                      EvalBackend backend) {
    const SelectionMoments m = selection_moments(f, p, backend);
    if (m.mean_fitness <= 0.0)
        throw_extinction("selection undefined: mean fitness is zero");

    std::vector<double> mu_after(static_cast<std::size_t>(f.n()));
    for (int i = 0; i < f.n(); ++i)
        mu_after[static_cast<std::size_t>(i)] = unit_clamp(
            m.mean_fx[static_cast<std::size_t>(i)] / m.mean_fitness);

    SelectionDetail detail{ProductPoint(std::move(mu_after)), m.mean_fitness,
                           m.sat_probability, 0.0};

    if (enumeration_backend(f, backend)) {
        // Independent route (Eq. select2): mu'_i - p_i = sigma_i f^(i;p)/E[f]
        const auto lin = linear_coefficients(f, p, backend);
        double worst = 0.0;
        for (int i = 0; i < f.n(); ++i) {
            const double direct = detail.mu_after[i] - p[i];
            const double via_coeff =
                p.sigma(i) * lin[static_cast<std::size_t>(i)] / m.mean_fitness;
            worst = std::max(worst, std::abs(direct - via_coeff));
        }
        detail.select2_residual = worst;
        if (worst > kSelect2Guard)
            throw_precondition(
                "selection-step cross-check failed (residual " +
                std::to_string(worst) + ")");
    }
    return detail;
}

ProductPoint selection_step(const BooleanFitnessFunction& f,
                            const ProductPoint& p, EvalBackend backend) {
    return selection_step_detail(f, p, backend).mu_after;
}

EmpiricalFrequencies sampling_step(const ProductPoint& p, int sample_size,
                                   std::uint64_t seed, long generation) {
    if (sample_size < 1) throw_argument("sample size must be >= 1");
    std::vector<int> counts(static_cast<std::size_t>(p.size()));
    for (int i = 0; i < p.size(); ++i) {
        CounterStream stream =
            stream_for(seed, static_cast<std::uint64_t>(generation),
                       static_cast<std::uint64_t>(i));
        counts[static_cast<std::size_t>(i)] =
            binomial_count(stream, sample_size, p.p_plus(i));
    }
    return EmpiricalFrequencies(std::move(counts), sample_size);
}

GenerationResult generation(const BooleanFitnessFunction& f,
                            const ProductPoint& p, int sample_size,
                            std::uint64_t seed, long t) {
    EmpiricalFrequencies nu = sampling_step(p, sample_size, seed, t);
    ProductPoint mu_after = selection_step(f, nu.to_product_point());
    return {std::move(nu), std::move(mu_after)};
}

namespace {

Trajectory run_process(const BooleanFitnessFunction& f,
                       const ProductPoint& mu0, int sample_size, long steps,
                       std::uint64_t seed, bool finite,
                       const RunOptions& options) {
    if (steps < 0) throw_argument("step count must be >= 0");
    if (mu0.size() != f.n()) throw_argument("mu0 dimension mismatch");

    Trajectory traj;
    traj.function = f;
    traj.n = f.n();
    traj.sample_size = finite ? sample_size : 0;
    traj.requested_steps = steps;
    traj.seed = seed;
    traj.finite = finite;
    traj.record_every = options.record_every;

    ProductPoint mu = mu0;
    for (long t = 0; t < steps; ++t) {
        StepRecord rec;
        rec.t = t;
        rec.mu_before = mu.mu();

        const SelectionMoments at_mu = selection_moments(f, mu);
        rec.ext_mu = at_mu.mean_fitness;
        rec.sat_prob = at_mu.sat_probability;

        ProductPoint nu_point = mu;
        bool nu_vertex = mu.is_vertex();
        if (finite) {
            EmpiricalFrequencies nu = sampling_step(mu, sample_size, seed, t);
            nu_vertex = nu.is_vertex();
            nu_point = nu.to_product_point();
            rec.nu_counts.resize(static_cast<std::size_t>(f.n()));
            for (int i = 0; i < f.n(); ++i)
                rec.nu_counts[static_cast<std::size_t>(i)] = nu.plus_count(i);
        }
        rec.nu = nu_point.mu();

        SelectionMoments at_nu = at_mu;
        if (finite) at_nu = selection_moments(f, nu_point);
        rec.ext_nu = at_nu.mean_fitness;
        rec.sampling_increment = rec.ext_nu - rec.ext_mu;

        if (f.landscape().is_lethal() && at_nu.mean_fitness <= 0.0) {
            if (!finite)
                throw_extinction("lethal landscape: satisfaction vanished");
            traj.extinct = true;
            traj.extinction_time = t;
            rec.mu_after = rec.nu;
            rec.ext_mu_after = rec.ext_nu;
            if (options.observer) options.observer(rec);
            if (options.record_every > 0 && t % options.record_every == 0)
                traj.records.push_back(std::move(rec));
            traj.steps_taken = t + 1;
            traj.terminal_mu = nu_point.mu();
            return traj;
        }

        ProductPoint mu_after(std::vector<double>{});
        {
            std::vector<double> next(static_cast<std::size_t>(f.n()));
            for (int i = 0; i < f.n(); ++i)
                next[static_cast<std::size_t>(i)] = unit_clamp(
                    at_nu.mean_fx[static_cast<std::size_t>(i)] /
                    at_nu.mean_fitness);
            mu_after = ProductPoint(std::move(next));
        }

        const auto lin = linear_coefficients(f, nu_point);
        rec.linear_mass = linear_mass_of(lin);
        if (options.verify) {
            // cross-check of the selection rule against Eq. select2
            double worst = 0.0;
            for (int i = 0; i < f.n(); ++i) {
                const double direct = mu_after[i] - nu_point[i];
                const double via = nu_point.sigma(i) *
                                   lin[static_cast<std::size_t>(i)] /
                                   at_nu.mean_fitness;
                worst = std::max(worst, std::abs(direct - via));
            }
            if (worst > kSelect2Guard)
                throw_precondition("selection-step cross-check failed");
        }

        rec.mu_after = mu_after.mu();
        rec.ext_mu_after = extension(f, mu_after);
        rec.selection_increment = rec.ext_mu_after - rec.ext_nu;
        if (options.verify)
            assert_density(f, rec.selection_increment, rec.linear_mass, t);

        if (options.observer) options.observer(rec);
        if (options.record_every > 0 && t % options.record_every == 0)
            traj.records.push_back(std::move(rec));

        mu = mu_after;
        traj.steps_taken = t + 1;

        if (nu_vertex && !traj.fixed) {
            traj.fixed = true;
            traj.fixation_time = t;
            traj.fixation_value = rec.ext_nu;
        }
        if (traj.fixed && options.early_stop) break;
    }

    traj.terminal_mu = mu.mu();
    if (mu.is_vertex() && !traj.fixed) {
        traj.fixed = true;
        traj.fixation_time = traj.steps_taken;
        traj.fixation_value = extension(f, mu);
    }
    return traj;
}

}  // namespace

Trajectory run_infinite(const BooleanFitnessFunction& f,
                        const ProductPoint& mu0, long steps,
                        const RunOptions& options) {
    return run_process(f, mu0, 0, steps, 0, false, options);
}

Trajectory run_finite(const BooleanFitnessFunction& f, const ProductPoint& mu0,
                      int sample_size, long steps, std::uint64_t seed,
                      const RunOptions& options) {
    if (sample_size < 1) throw_argument("sample size must be >= 1");
    return run_process(f, mu0, sample_size, steps, seed, true, options);
}

std::vector<WaddingtonGeneration> waddington_scenario(
    int n, int k, const std::vector<int>& h_schedule,
    const FitnessLandscape& landscape, const WaddingtonMode& mode,
    const ProductPoint& mu0) {
    if (mu0.size() != n) throw_argument("mu0 dimension mismatch");
    std::vector<WaddingtonGeneration> report;
    report.reserve(h_schedule.size() + 1);

    ProductPoint mu = mu0;
    auto snapshot = [&](long t, int h) {
        WaddingtonGeneration g;
        g.t = t;
        g.h = h;
        const auto f_heat = BooleanFitnessFunction::waddington(n, k, 1, landscape);
        const auto f_normal =
            BooleanFitnessFunction::waddington(n, k, -1, landscape);
        g.sat_heat = satisfaction_probability(f_heat, mu);
        g.sat_normal = satisfaction_probability(f_normal, mu);
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += mu[i];
        g.mean_mu = mean / n;
        g.mu = mu.mu();
        return g;
    };

    for (std::size_t t = 0; t < h_schedule.size(); ++t) {
        const int h = h_schedule[t];
        WaddingtonGeneration g = snapshot(static_cast<long>(t), h);
        const auto f_h = BooleanFitnessFunction::waddington(n, k, h, landscape);

        ProductPoint parent = mu;
        if (mode.finite) {
            parent = sampling_step(mu, mode.sample_size, mode.seed,
                                   static_cast<long>(t))
                         .to_product_point();
        }
        const bool extinct =
            landscape.is_lethal() &&
            satisfaction_probability(f_h, parent) <= 0.0;
        if (extinct) {
            g.extinct = true;
            report.push_back(std::move(g));
            return report;
        }
        report.push_back(std::move(g));
        mu = selection_step(f_h, parent);
    }
    report.push_back(snapshot(static_cast<long>(h_schedule.size()),
                              h_schedule.empty() ? -1 : h_schedule.back()));
    return report;
}

}  // namespace boolution
