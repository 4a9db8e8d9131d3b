#pragma once

#include <vector>

#include "boolution/function.hpp"
#include "boolution/types.hpp"

namespace boolution {

// Backend selection for expectation computations.  Auto picks mask
// enumeration for n <= kMaxEnumerationN and the locus-count dynamic program
// (Poisson binomial) for Threshold / SumEqualsK beyond that; anything else
// past the cap is a capability error.  Evaluation is exact in either case:
// there is no Monte Carlo fallback inside this module.
enum class EvalBackend { Auto, Enumeration, CountDp };

// E[f], Pr[satisfied] and E[f * x_i] under one product distribution,
// computed in a single enumeration (or DP) sweep.
struct SelectionMoments {
    double mean_fitness = 0.0;
    double sat_probability = 0.0;
    double mean_f_squared = 0.0;
    std::vector<double> mean_fx;  // E[f * x_i] per locus
};

// Multilinear extension E_{x~mu}[f(x)].
double extension(const BooleanFitnessFunction& f, const ProductPoint& mu,
                 EvalBackend backend = EvalBackend::Auto);

double satisfaction_probability(const BooleanFitnessFunction& f,
                                const ProductPoint& mu,
                                EvalBackend backend = EvalBackend::Auto);

SelectionMoments selection_moments(const BooleanFitnessFunction& f,
                                   const ProductPoint& mu,
                                   EvalBackend backend = EvalBackend::Auto);

// Partial derivative of the extension along locus i at an arbitrary point
// (the extension is affine in each coordinate).
double extension_gradient(const BooleanFitnessFunction& f,
                          const ProductPoint& point, int locus,
                          EvalBackend backend = EvalBackend::Auto);

// Biased Fourier coefficient f^(S;mu) = E_mu[f * phi_S] for an explicit
// subset, by exact enumeration (or DP for |S| <= 2 on count families).
// Degenerate-coordinate error when sigma_i = 0 for some i in S.
double coefficient(const BooleanFitnessFunction& f,
                   const std::vector<int>& subset, const ProductPoint& mu,
                   EvalBackend backend = EvalBackend::Auto);

// f^({i};mu) for every locus, with the vertex convention: a coordinate with
// sigma_i = 0 contributes 0.
std::vector<double> linear_coefficients(const BooleanFitnessFunction& f,
                                        const ProductPoint& mu,
                                        EvalBackend backend = EvalBackend::Auto);

// Poisson-binomial distribution of the +1 count under per-locus
// probabilities p (exported for tests and the Waddington oracle).
std::vector<double> count_distribution(const std::vector<double>& p_plus);

}  // namespace boolution
