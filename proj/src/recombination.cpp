#include <algorithm>
#include <bit>
#include <cmath>

#include "boolution/dynamics.hpp"

namespace boolution {
namespace {

constexpr double kMassTolerance = 1e-12;

}  // namespace

GenotypeDistribution::GenotypeDistribution(std::vector<double> probabilities)
    : p_(std::move(probabilities)) {
    if (p_.empty() || (p_.size() & (p_.size() - 1)) != 0)
        throw_argument("genotype distribution length must be a power of two");
    n_ = std::countr_zero(p_.size());
    if (n_ < 1 || n_ > kMaxRecombinationN)
        throw_capability("genotype distributions support 1 <= n <= 8");
    double total = 0.0;
    for (double v : p_) {
        if (v < 0.0) throw_argument("negative genotype probability");
        total += v;
    }
    if (std::abs(total - 1.0) > kMassTolerance)
        throw_argument("genotype probabilities must sum to 1");
}

GenotypeDistribution GenotypeDistribution::product(const ProductPoint& mu) {
    const int n = mu.size();
    if (n > kMaxRecombinationN)
        throw_capability("genotype distributions support n <= 8");
    std::vector<double> p(std::size_t(1) << n, 1.0);
    for (std::size_t g = 0; g < p.size(); ++g) {
        for (int i = 0; i < n; ++i)
            p[g] *= ((g >> i) & 1u) ? mu.p_plus(i) : mu.p_minus(i);
    }
    return GenotypeDistribution(std::move(p));
}

double GenotypeDistribution::marginal_mean(int i) const {
    double mean = 0.0;
    for (std::size_t g = 0; g < p_.size(); ++g)
        mean += ((g >> i) & 1u) ? p_[g] : -p_[g];
    return mean;
}

double GenotypeDistribution::linkage_disequilibrium() const {
    std::vector<double> q(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        double plus = 0.0;
        for (std::size_t g = 0; g < p_.size(); ++g)
            if ((g >> i) & 1u) plus += p_[g];
        q[static_cast<std::size_t>(i)] = plus;
    }
    double worst = 0.0;
    for (std::size_t g = 0; g < p_.size(); ++g) {
        double prod = 1.0;
        for (int i = 0; i < n_; ++i)
            prod *= ((g >> i) & 1u) ? q[static_cast<std::size_t>(i)]
                                    : 1.0 - q[static_cast<std::size_t>(i)];
        worst = std::max(worst, std::abs(p_[g] - prod));
    }
    return worst;
}

GenotypeDistribution recombine_once(const GenotypeDistribution& p) {
    const int n = p.n();
    const std::size_t size = std::size_t(1) << n;
    const std::uint32_t full = static_cast<std::uint32_t>(size - 1);

    // marg[S][g & S] = probability that the loci in S match g; built by
    // summing out one locus at a time, high popcount to low.
    std::vector<std::vector<double>> marg(size);
    marg[full].assign(p.probabilities().begin(), p.probabilities().end());
    for (int pc = n - 1; pc >= 0; --pc) {
        for (std::uint32_t s = 0; s <= full; ++s) {
            if (std::popcount(s) != pc) continue;
            const int i = std::countr_zero(~s);
            const auto& up = marg[s | (1u << i)];
            auto& here = marg[s];
            here.assign(size, 0.0);
            for (std::uint32_t q = 0; q <= full; ++q) {
                if ((q & ~s) != 0) continue;
                here[q] = up[q] + up[q | (1u << i)];
            }
        }
    }

    // Free recombination under random mating: the offspring takes the loci
    // in S from one parent and the rest from the other, S uniform.
    const double scale = 1.0 / static_cast<double>(size);
    std::vector<double> next(size, 0.0);
    for (std::uint32_t g = 0; g <= full; ++g) {
        double total = 0.0;
        for (std::uint32_t s = 0; s <= full; ++s)
            total += marg[s][g & s] * marg[full & ~s][g & full & ~s];
        next[g] = total * scale;
    }
    return GenotypeDistribution(std::move(next));
}

std::vector<RecombinationStep> recombination_dynamics(
    const BooleanFitnessFunction& f, const GenotypeDistribution& p0,
    long steps, bool selection_on) {
    if (f.n() != p0.n())
        throw_argument("function / distribution dimension mismatch");
    if (steps < 0) throw_argument("step count must be >= 0");

    std::vector<RecombinationStep> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    GenotypeDistribution p = p0;
    out.push_back({p, p.linkage_disequilibrium()});

    const SatTable& sat = f.sat_table();
    const double vs = f.landscape().satisfied_value();
    const double vu = f.landscape().unsatisfied_value();

    for (long t = 0; t < steps; ++t) {
        if (selection_on) {
            std::vector<double> w = p.probabilities();
            double z = 0.0;
            for (std::size_t g = 0; g < w.size(); ++g) {
                w[g] *= sat.bit(static_cast<std::uint32_t>(g)) ? vs : vu;
                z += w[g];
            }
            if (z <= 0.0)
                throw_extinction("selection annihilated the distribution");
            for (double& v : w) v /= z;
            p = GenotypeDistribution(std::move(w));
        }
        p = recombine_once(p);
        out.push_back({p, p.linkage_disequilibrium()});
    }
    return out;
}

}  // namespace boolution
