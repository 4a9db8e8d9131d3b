#include "boolution/kernels.hpp"

#include <cmath>

// Reference kernels.  These define the semantics; the SIMD variants are
// checked against them in tests/test_kernels.cpp.

namespace boolution::kern {
namespace {

struct Neumaier {
    double sum = 0.0;
    double comp = 0.0;

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

double weighted_sum_scalar(const double* a, const double* w,
                           std::size_t len) {
    Neumaier acc;
    for (std::size_t j = 0; j < len; ++j) acc.add(a[j] * w[j]);
    return acc.value();
}

MaskedSums masked_sums_scalar(const double* vals, const std::uint64_t* bits,
                              std::size_t len) {
    Neumaier in, out;
    for (std::size_t j = 0; j < len; ++j) {
        const bool set = (bits[j >> 6] >> (j & 63)) & 1u;
        if (set) {
            in.add(vals[j]);
        } else {
            out.add(vals[j]);
        }
    }
    return {in.value(), out.value()};
}

void pattern_scale_scalar(double* buf, std::size_t len, std::size_t run,
                          double c_set, double c_clear) {
    for (std::size_t base = 0; base < len; base += 2 * run) {
        for (std::size_t o = 0; o < run; ++o) buf[base + o] *= c_clear;
        for (std::size_t o = 0; o < run; ++o) buf[base + run + o] *= c_set;
    }
}

void weight_extend_scalar(double* buf, std::size_t half, double p_set,
                          double p_clear) {
    for (std::size_t j = 0; j < half; ++j) {
        const double v = buf[j];
        buf[half + j] = v * p_set;
        buf[j] = v * p_clear;
    }
}

void bias_pass_scalar(double* buf, std::size_t len, std::size_t run,
                      double w_set, double w_clear, double half_sigma) {
    for (std::size_t base = 0; base < len; base += 2 * run) {
        for (std::size_t o = 0; o < run; ++o) {
            const double lo = buf[base + o];
            const double hi = buf[base + run + o];
            buf[base + o] = w_set * hi + w_clear * lo;
            buf[base + run + o] = half_sigma * (hi - lo);
        }
    }
}

}  // namespace

namespace detail {
const VTable scalar_vtable = {
    weighted_sum_scalar,  masked_sums_scalar, pattern_scale_scalar,
    weight_extend_scalar, bias_pass_scalar,
};
}  // namespace detail

}  // namespace boolution::kern
