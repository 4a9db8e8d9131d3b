#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "boolution/errors.hpp"

namespace boolution {

// One full assignment in {-1,+1}^n, one allele per locus.
class Genotype {
  public:
    Genotype() = default;
    explicit Genotype(std::vector<int> bits) : bits_(std::move(bits)) {
        for (int b : bits_) {
            if (b != 1 && b != -1)
                throw_argument("genotype entries must be +1 or -1");
        }
    }

    // Mask form: locus 0 = LSB, bit set <=> allele +1.
    static Genotype from_mask(std::uint32_t mask, int n) {
        std::vector<int> bits(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) bits[i] = (mask >> i) & 1 ? 1 : -1;
        return Genotype(std::move(bits));
    }

    std::uint32_t to_mask() const {
        if (size() > 32) throw_argument("genotype too wide for mask form");
        std::uint32_t m = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] > 0) m |= (1u << i);
        return m;
    }

    int size() const { return static_cast<int>(bits_.size()); }
    int operator[](int i) const { return bits_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& bits() const { return bits_; }

  private:
    std::vector<int> bits_;
};

// A point mu in [-1,1]^n: per-locus expectations defining the product
// distribution on the cube.  sigma_i = sqrt(1 - mu_i^2) is always derived.
class ProductPoint {
  public:
    ProductPoint() = default;
    explicit ProductPoint(std::vector<double> mu) : mu_(std::move(mu)) {
        for (double m : mu_) {
            if (!(m >= -1.0 && m <= 1.0))
                throw_argument("product point entries must lie in [-1,1]");
        }
    }

    static ProductPoint uniform(int n) {
        return ProductPoint(std::vector<double>(static_cast<std::size_t>(n),
                                                0.0));
    }
    static ProductPoint vertex(const Genotype& g) {
        std::vector<double> mu(static_cast<std::size_t>(g.size()));
        for (int i = 0; i < g.size(); ++i) mu[static_cast<std::size_t>(i)] = g[i];
        return ProductPoint(std::move(mu));
    }

    int size() const { return static_cast<int>(mu_.size()); }
    double operator[](int i) const { return mu_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& mu() const { return mu_; }

    double sigma(int i) const {
        const double m = (*this)[i];
        return std::sqrt((1.0 - m) * (1.0 + m));
    }
    double sigma_sq(int i) const {
        const double m = (*this)[i];
        return (1.0 - m) * (1.0 + m);
    }

    bool is_vertex() const {
        for (double m : mu_)
            if (m != 1.0 && m != -1.0) return false;
        return true;
    }

    // Probability that locus i carries allele +1.
    double p_plus(int i) const { return 0.5 * (1.0 + (*this)[i]); }
    double p_minus(int i) const { return 0.5 * (1.0 - (*this)[i]); }

    ProductPoint with_coordinate(int i, double value) const {
        std::vector<double> mu = mu_;
        mu[static_cast<std::size_t>(i)] = value;
        return ProductPoint(std::move(mu));
    }

  private:
    std::vector<double> mu_;
};

}  // namespace boolution
