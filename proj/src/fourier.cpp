#include "boolution/fourier.hpp"

#include <bit>
#include <cmath>

#include "boolution/kernels.hpp"

namespace boolution {
namespace {

void require_full_table_n(int n, const char* what) {
    if (n > kMaxFullTableN)
        throw_capability(std::string(what) + " requires n <= 12");
}

double checked_sigma(const ProductPoint& mu, int i) {
    if (mu.sigma_sq(i) == 0.0)
        throw_degenerate("sigma_i = 0 at locus " + std::to_string(i));
    return mu.sigma(i);
}

}  // namespace

FourierTable::FourierTable(const BooleanFitnessFunction& f,
                           const ProductPoint& mu)
    : n_(f.n()), base_(mu) {
    require_full_table_n(n_, "full Fourier table");
    if (mu.size() != n_) throw_argument("product point dimension mismatch");

    const std::size_t size = std::size_t(1) << n_;
    const SatTable& sat = f.sat_table();
    coeffs_.resize(size);
    const double vs = f.landscape().satisfied_value();
    const double vu = f.landscape().unsatisfied_value();
    for (std::size_t m = 0; m < size; ++m)
        coeffs_[m] = sat.bit(static_cast<std::uint32_t>(m)) ? vs : vu;

    // One butterfly pass per locus turns values into coefficients in place;
    // half_sigma = 0 at a fixed locus zeroes that locus's components, which
    // is the vertex convention.
    for (int i = 0; i < n_; ++i) {
        kern::bias_pass(coeffs_.data(), size, std::size_t(1) << i,
                        mu.p_plus(i), mu.p_minus(i), 0.5 * mu.sigma(i));
    }
}

double FourierTable::weighted_mass() const {
    double total = 0.0;
    for (std::size_t m = 1; m < coeffs_.size(); ++m)
        total += static_cast<double>(std::popcount(m)) * coeffs_[m] *
                 coeffs_[m];
    return total;
}

double FourierTable::nonempty_mass() const {
    double total = 0.0;
    for (std::size_t m = 1; m < coeffs_.size(); ++m)
        total += coeffs_[m] * coeffs_[m];
    return total;
}

double FourierTable::influence(int locus) const {
    double total = 0.0;
    for (std::size_t m = 0; m < coeffs_.size(); ++m)
        if ((m >> locus) & 1u) total += coeffs_[m] * coeffs_[m];
    return total;
}

double basis_value_at(const std::vector<int>& subset, const ProductPoint& mu,
                      const std::vector<double>& y) {
    if (y.size() != static_cast<std::size_t>(mu.size()))
        throw_argument("point dimension mismatch");
    double v = 1.0;
    for (int i : subset) {
        const double s = checked_sigma(mu, i);
        v *= (y[static_cast<std::size_t>(i)] - mu[i]) / s;
    }
    return v;
}

double basis_value(const std::vector<int>& subset, const ProductPoint& mu,
                   const Genotype& x) {
    std::vector<double> y(x.bits().begin(), x.bits().end());
    return basis_value_at(subset, mu, y);
}

DifferenceFunction::DifferenceFunction(BooleanFitnessFunction f, int locus,
                                       double sigma)
    : f_(std::move(f)), locus_(locus), half_sigma_(0.5 * sigma) {}

double DifferenceFunction::operator()(const Genotype& x) const {
    if (x.size() != f_.n()) throw_argument("genotype length mismatch");
    std::vector<int> bits = x.bits();
    bits[static_cast<std::size_t>(locus_)] = 1;
    const double up = f_.evaluate(Genotype(bits));
    bits[static_cast<std::size_t>(locus_)] = -1;
    const double down = f_.evaluate(Genotype(bits));
    return half_sigma_ * (up - down);
}

DifferenceFunction difference_operator(const BooleanFitnessFunction& f,
                                       int locus, const ProductPoint& mu) {
    if (mu.size() != f.n()) throw_argument("product point dimension mismatch");
    return DifferenceFunction(f, locus, checked_sigma(mu, locus));
}

double difference_expansion_max_residual(const BooleanFitnessFunction& f,
                                         int locus, const ProductPoint& mu) {
    require_full_table_n(f.n(), "difference expansion check");
    const DifferenceFunction d = difference_operator(f, locus, mu);
    const FourierTable table(f, mu);
    const int n = f.n();
    double worst = 0.0;
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
        const Genotype x = Genotype::from_mask(m, n);
        double expansion = 0.0;
        for (std::uint32_t s = 0; s < (1u << n); ++s) {
            if (!((s >> locus) & 1u)) continue;
            std::vector<int> rest;
            for (int i = 0; i < n; ++i)
                if (i != locus && ((s >> i) & 1u)) rest.push_back(i);
            expansion += table.at(s) * basis_value(rest, mu, x);
        }
        worst = std::max(worst, std::abs(d(x) - expansion));
    }
    return worst;
}

double cross_difference_max(const BooleanFitnessFunction& f, int i, int j) {
    require_full_table_n(f.n(), "cross difference scan");
    if (i == j) throw_argument("cross difference needs distinct loci");
    const int n = f.n();
    double worst = 0.0;
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
        std::vector<int> bits = Genotype::from_mask(m, n).bits();
        auto val = [&](int bi, int bj) {
            bits[static_cast<std::size_t>(i)] = bi;
            bits[static_cast<std::size_t>(j)] = bj;
            return f.evaluate(Genotype(bits));
        };
        // D_i^(1/2) D_j^(1/2) f = (1/4)(f_{++} - f_{+-} - f_{-+} + f_{--})
        const double v =
            0.25 * (val(1, 1) - val(1, -1) - val(-1, 1) + val(-1, -1));
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

double russo_margulis_derivative(const BooleanFitnessFunction& f, int locus,
                                 const ProductPoint& mu, EvalBackend backend) {
    const double s = checked_sigma(mu, locus);
    return coefficient(f, {locus}, mu, backend) / s;
}

bool is_monotone(const BooleanFitnessFunction& f) {
    require_full_table_n(f.n(), "monotonicity check");
    const SatTable& sat = f.sat_table();
    const int n = f.n();
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
        if (!sat.bit(m)) continue;
        // every genotype above a satisfied one must be satisfied
        for (int i = 0; i < n; ++i) {
            if (!((m >> i) & 1u) && !sat.bit(m | (1u << i))) return false;
        }
    }
    return true;
}

InfluenceIdentityReport monotone_influence_identity(
    const BooleanFitnessFunction& f, const ProductPoint& mu) {
    if (!f.landscape().is_weak())
        throw_argument("influence identity is stated for weak selection");
    require_full_table_n(f.n(), "influence identity");
    const double eps = f.landscape().epsilon();
    const FourierTable table(f, mu);

    InfluenceIdentityReport report;
    report.monotone = is_monotone(f);
    report.residuals.resize(static_cast<std::size_t>(f.n()));
    for (int i = 0; i < f.n(); ++i) {
        const double lhs = table.influence(i);
        const double rhs =
            0.5 * eps * mu.sigma(i) * table.at(1u << i);
        report.residuals[static_cast<std::size_t>(i)] = lhs - rhs;
    }
    return report;
}

double poincare_gap(const BooleanFitnessFunction& f, const ProductPoint& mu) {
    require_full_table_n(f.n(), "Poincare gap");
    const FourierTable table(f, mu);
    const auto m = selection_moments(f, mu);
    const double variance =
        m.mean_f_squared - m.mean_fitness * m.mean_fitness;
    return table.weighted_mass() - variance;
}

}  // namespace boolution
