#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "boolution/extension.hpp"
#include "boolution/function.hpp"
#include "boolution/types.hpp"

namespace boolution {

// Full coefficient tables are computed only up to this locus count.
inline constexpr int kMaxFullTableN = 12;

// Complete mu-biased Fourier table of a fitness function: coefficient(S) for
// every subset mask S.  coefficient(0) equals the extension at the base
// point; Parseval holds against E_mu[f^2].
class FourierTable {
  public:
    FourierTable(const BooleanFitnessFunction& f, const ProductPoint& mu);

    int n() const { return n_; }
    int max_order() const { return n_; }
    const ProductPoint& base_point() const { return base_; }

    double at(std::uint32_t subset_mask) const {
        return coeffs_[subset_mask];
    }
    const std::vector<double>& coefficients() const { return coeffs_; }

    // sum over S of |S| * coefficient(S)^2 (total influence)
    double weighted_mass() const;
    // sum over nonempty S of coefficient(S)^2
    double nonempty_mass() const;
    // sum over S containing the locus of coefficient(S)^2
    double influence(int locus) const;

  private:
    int n_;
    ProductPoint base_;
    std::vector<double> coeffs_;
};

// phi^mu_S(x) = prod_{i in S} (x_i - mu_i)/sigma_i.  Degenerate-coordinate
// error when sigma_i = 0 for some i in S.  Also defined for fractional
// points y in [-1,1]^n (used by the sampling-noise analysis).
double basis_value(const std::vector<int>& subset, const ProductPoint& mu,
                   const Genotype& x);
double basis_value_at(const std::vector<int>& subset, const ProductPoint& mu,
                      const std::vector<double>& y);

// Restriction difference D_i^(mu) f = (sigma_i/2)(f_{i=1} - f_{i=-1}),
// returned as a callable on genotypes (the value ignores x_i).
class DifferenceFunction {
  public:
    DifferenceFunction(BooleanFitnessFunction f, int locus, double sigma);
    double operator()(const Genotype& x) const;
    int locus() const { return locus_; }

  private:
    BooleanFitnessFunction f_;
    int locus_;
    double half_sigma_;
};

DifferenceFunction difference_operator(const BooleanFitnessFunction& f,
                                       int locus, const ProductPoint& mu);

// Max over the cube of |D_i^(mu) f(x) - sum_{S ni i} f^(S;mu) phi_{S\i}(x)|
// (n <= kMaxFullTableN).
double difference_expansion_max_residual(const BooleanFitnessFunction& f,
                                         int locus, const ProductPoint& mu);

// Max over the cube of |D_i^(1/2) D_j^(1/2) f(x)|; bounded by eps/2 for a
// weak-selection landscape (parity attains it).
double cross_difference_max(const BooleanFitnessFunction& f, int i, int j);

// d extension / d mu_i computed as f^(i;mu)/sigma_i.
double russo_margulis_derivative(const BooleanFitnessFunction& f, int locus,
                                 const ProductPoint& mu,
                                 EvalBackend backend = EvalBackend::Auto);

// Monotone under the coordinatewise +-1 order?  Checked by enumeration
// (n <= kMaxFullTableN).
bool is_monotone(const BooleanFitnessFunction& f);

struct InfluenceIdentityReport {
    bool monotone = false;
    // influence_i - (eps*sigma_i/2) * f^(i;mu), per locus
    std::vector<double> residuals;
};

// Residuals of the monotone influence identity; requires a weak-selection
// landscape.  Non-monotone input is flagged, residuals still returned.
InfluenceIdentityReport monotone_influence_identity(
    const BooleanFitnessFunction& f, const ProductPoint& mu);

// sum_S |S| f^(S;mu)^2 - Var_mu[f], with the variance computed from raw
// moments rather than the table (so nonnegativity is a real check).
double poincare_gap(const BooleanFitnessFunction& f, const ProductPoint& mu);

}  // namespace boolution
