#pragma once

#include <cstdint>
#include <vector>

#include "boolution/dynamics.hpp"
#include "boolution/extension.hpp"
#include "boolution/fourier.hpp"

namespace boolution {

// Exact expectation-over-samples checks enumerate the per-coordinate
// binomial grid; the grid must stay below this many points.
inline constexpr double kMaxGridPoints = 1e6;

// ---------------------------------------------------------------------------
// Single-step inequalities and identities
// ---------------------------------------------------------------------------

// [ext(mu') - ext(nu)] - (1 - n*eps) * sum_i f^(i;nu)^2 with
// mu' = selection_step(f, nu).  Nonnegative whenever n*eps < 1.
// Precondition error unless the landscape is weak with n*eps < 1.
double density_gap(const BooleanFitnessFunction& f, const ProductPoint& nu);

// Exactness defect of the hybrid-derivative expansion at locus i >= 1:
// builds w = (mu'_0..mu'_{i-1}, nu_i..nu_{n-1}) and returns
//   [d ext/d mu_i at w - d ext/d mu_i at nu]
//   - (1/(E_nu[f] sigma_i)) sum_{j<i} f^(j;nu) f^({i,j};nu).
// The expansion is exact for functions without interactions above pairwise;
// in general the defect scales with the cube of the selection strength.
double hybrid_derivative_residual(const BooleanFitnessFunction& f,
                                  const ProductPoint& nu, int locus);

struct GridCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    long grid_points = 0;
};

// Exact E_{nu~B}[(ext(mu)-ext(nu))^2] vs (1/(N-1)) E_{nu~B}[sum_i f^(i;nu)^2]
// over the full sampling grid; contract lhs <= rhs.
GridCheck variance_noise_exact(const BooleanFitnessFunction& f,
                               const ProductPoint& mu, int sample_size);

// Exact E[(ext(nu)-ext(mu))^2] vs E[ext(mu')-ext(nu)] / ((N-1)(1-n*eps)).
GridCheck noise_fitness_check(const BooleanFitnessFunction& f,
                              const ProductPoint& mu, int sample_size);

// Monte Carlo fallback for grids past the cap; clearly labeled, reports
// standard errors instead of pretending to be exact.
struct MonteCarloCheck {
    double lhs = 0.0, rhs = 0.0;
    double lhs_se = 0.0, rhs_se = 0.0;
    long samples = 0;
};
MonteCarloCheck variance_noise_monte_carlo(const BooleanFitnessFunction& f,
                                           const ProductPoint& mu,
                                           int sample_size, long samples,
                                           std::uint64_t seed);

struct PhiMoments {
    double second_moment = 0.0;  // E_B[phi_i^mu(nu)^2], equals 1/N
    double variance_ratio = 0.0; // E_B[sigma_i(nu)^2]/sigma_i(mu)^2 = 1-1/N
};
PhiMoments phi_moments(const ProductPoint& mu, int sample_size, int locus);

// Conditional variance of ext(nu) given mu under B(mu):
// sum_{S nonempty} f^(S;mu)^2 N^{-|S|}  (full table, n <= kMaxFullTableN).
double conditional_sampling_variance(const BooleanFitnessFunction& f,
                                     const ProductPoint& mu, int sample_size);

// Pointwise residual of the coefficient-extension identity
// f^(i;nu) = (sigma_i(nu)/sigma_i(mu)) sum_{S ni i} f^(S;mu) phi_{S\i}(nu).
double lin_mu_residual(const BooleanFitnessFunction& f, const ProductPoint& mu,
                       const std::vector<double>& nu, int locus);

// ---------------------------------------------------------------------------
// Martingale accumulators (whole-trajectory statistics)
// ---------------------------------------------------------------------------

struct MartingaleLedger {
    std::vector<double> zeta;    // zeta_t = ext(nu^t) - ext(mu^t), padded to T
    double s_total = 0.0;        // S_T
    double m_total = 0.0;        // M_T = sum zeta^2
    double v_total = 0.0;        // V_T = sum E[zeta^2 | history]
    double h_total = 0.0;        // H_T = M_T + V_T
    bool exact_conditional = false;  // V from the closed form (vs plug-in)
    // Two standard normalizations of the sampling-noise scale, reported
    // side by side: sqrt(2 eps/((N-1)(1-n eps))) and sqrt(eps/(N(1-n eps))),
    // each with its alpha = sqrt(2 beta ln(2/beta)).
    double beta_lemma = 0.0;
    double alpha_lemma = 0.0;
    double beta_theorem = 0.0;
    double alpha_theorem = 0.0;
};

// Accumulates the ledger over a finite-population trajectory recorded with
// record_every = 1.  Early-stopped trajectories are padded with exactly-zero
// increments (the absorbed state has zero sampling variance), so the ledger
// always covers requested_steps terms.  check_identities additionally
// asserts the lin-mu identity at each realized sample point.
MartingaleLedger martingale_accumulate(const Trajectory& trajectory,
                                       bool check_identities = false);

// ---------------------------------------------------------------------------
// alpha-determined tracking
// ---------------------------------------------------------------------------

struct DeterminedTracker {
    double alpha = 0.0;
    std::vector<long> determined_time;  // first t with |mu_j^t| > 1-alpha; -1 never
    std::vector<long> absorbed_time;    // first t with |nu_j^t| = 1; -1 never
    bool terminal_vertex = false;
    bool absorption_consistent = true;  // nu_j never moves after absorbing
};

// alpha <= 0 selects the default 1/(n^2 N).
DeterminedTracker determined_report(const Trajectory& trajectory,
                                    double alpha = 0.0);

// Exact probability that a locus with expectation mu_j fails to fix in one
// sample of size N, i.e. Pr[|nu_j| < 1].
double non_fixation_probability(double mu_j, int sample_size);

// Interval lengths used by the fast-vertex argument, exposed as diagnostics.
double fast_vertex_t1(int sample_size, int n);
double fast_vertex_t2(int sample_size, int n, double epsilon);

}  // namespace boolution
