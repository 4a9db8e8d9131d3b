// AVX2 variants of the cube kernels.  Compiled with -mavx2 (no FMA: the
// mul+add sequences must round exactly like the scalar reference).

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "boolution/kernels.hpp"

namespace boolution::kern {
namespace {

struct NeumaierLanes {
    __m256d sum = _mm256_setzero_pd();
    __m256d comp = _mm256_setzero_pd();

    void add(__m256d v) {
        const __m256d absmask =
            _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
        const __m256d t = _mm256_add_pd(sum, v);
        const __m256d abs_s = _mm256_and_pd(sum, absmask);
        const __m256d abs_v = _mm256_and_pd(v, absmask);
        // err = |sum|>=|v| ? (sum-t)+v : (v-t)+sum
        const __m256d big_first =
            _mm256_add_pd(_mm256_sub_pd(sum, t), v);
        const __m256d small_first =
            _mm256_add_pd(_mm256_sub_pd(v, t), sum);
        const __m256d pick = _mm256_cmp_pd(abs_s, abs_v, _CMP_GE_OQ);
        comp = _mm256_add_pd(comp,
                             _mm256_blendv_pd(small_first, big_first, pick));
        sum = t;
    }

    // Lane-wise value(), then compensated horizontal combine.
    double total() const {
        alignas(32) double s[4], c[4];
        _mm256_store_pd(s, sum);
        _mm256_store_pd(c, comp);
        double acc = 0.0, comp_acc = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double v = s[k] + c[k];
            const double t = acc + v;
            if (std::abs(acc) >= std::abs(v)) {
                comp_acc += (acc - t) + v;
            } else {
                comp_acc += (v - t) + acc;
            }
            acc = t;
        }
        return acc + comp_acc;
    }
};

double weighted_sum_avx2(const double* a, const double* w, std::size_t len) {
    NeumaierLanes acc;
    std::size_t j = 0;
    for (; j + 4 <= len; j += 4) {
        acc.add(_mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(w + j)));
    }
    double tail = acc.total();
    double comp = 0.0;
    for (; j < len; ++j) {
        const double v = a[j] * w[j];
        const double t = tail + v;
        if (std::abs(tail) >= std::abs(v)) {
            comp += (tail - t) + v;
        } else {
            comp += (v - t) + tail;
        }
        tail = t;
    }
    return tail + comp;
}

// 16-entry lane-mask table: entry k has lane i all-ones iff bit i of k set.
struct MaskLut {
    alignas(32) __m256d m[16];
    MaskLut() {
        for (int k = 0; k < 16; ++k) {
            alignas(32) std::uint64_t words[4];
            for (int i = 0; i < 4; ++i)
                words[i] = (k >> i) & 1 ? ~0ull : 0ull;
            m[k] = _mm256_load_pd(reinterpret_cast<const double*>(words));
        }
    }
};

MaskedSums masked_sums_avx2(const double* vals, const std::uint64_t* bits,
                            std::size_t len) {
    static const MaskLut lut;
    NeumaierLanes in, out;
    std::size_t j = 0;
    for (; j + 4 <= len; j += 4) {
        const unsigned nib = (bits[j >> 6] >> (j & 63)) & 0xF;
        const __m256d v = _mm256_loadu_pd(vals + j);
        const __m256d m = lut.m[nib];
        in.add(_mm256_and_pd(v, m));
        out.add(_mm256_andnot_pd(m, v));
    }
    double in_s = in.total(), out_s = out.total();
    for (; j < len; ++j) {
        const bool set = (bits[j >> 6] >> (j & 63)) & 1u;
        if (set) {
            in_s += vals[j];
        } else {
            out_s += vals[j];
        }
    }
    return {in_s, out_s};
}

void pattern_scale_avx2(double* buf, std::size_t len, std::size_t run,
                        double c_set, double c_clear) {
    if (run == 1) {
        const __m256d c = _mm256_set_pd(c_set, c_clear, c_set, c_clear);
        std::size_t j = 0;
        for (; j + 4 <= len; j += 4) {
            _mm256_storeu_pd(buf + j,
                             _mm256_mul_pd(_mm256_loadu_pd(buf + j), c));
        }
        for (; j < len; ++j) buf[j] *= (j & 1) ? c_set : c_clear;
        return;
    }
    if (run == 2) {
        const __m256d c = _mm256_set_pd(c_set, c_set, c_clear, c_clear);
        std::size_t j = 0;
        for (; j + 4 <= len; j += 4) {
            _mm256_storeu_pd(buf + j,
                             _mm256_mul_pd(_mm256_loadu_pd(buf + j), c));
        }
        for (; j < len; ++j) buf[j] *= (j & 2) ? c_set : c_clear;
        return;
    }
    const __m256d cc = _mm256_set1_pd(c_clear);
    const __m256d cs = _mm256_set1_pd(c_set);
    for (std::size_t base = 0; base < len; base += 2 * run) {
        std::size_t o = 0;
        for (; o + 4 <= run; o += 4) {
            double* lo = buf + base + o;
            double* hi = buf + base + run + o;
            _mm256_storeu_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(lo), cc));
            _mm256_storeu_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(hi), cs));
        }
        for (; o < run; ++o) {
            buf[base + o] *= c_clear;
            buf[base + run + o] *= c_set;
        }
    }
}

void weight_extend_avx2(double* buf, std::size_t half, double p_set,
                        double p_clear) {
    const __m256d ps = _mm256_set1_pd(p_set);
    const __m256d pc = _mm256_set1_pd(p_clear);
    std::size_t j = 0;
    for (; j + 4 <= half; j += 4) {
        const __m256d v = _mm256_loadu_pd(buf + j);
        _mm256_storeu_pd(buf + half + j, _mm256_mul_pd(v, ps));
        _mm256_storeu_pd(buf + j, _mm256_mul_pd(v, pc));
    }
    for (; j < half; ++j) {
        const double v = buf[j];
        buf[half + j] = v * p_set;
        buf[j] = v * p_clear;
    }
}

void bias_pass_avx2(double* buf, std::size_t len, std::size_t run,
                    double w_set, double w_clear, double half_sigma) {
    const __m256d ws = _mm256_set1_pd(w_set);
    const __m256d wc = _mm256_set1_pd(w_clear);
    const __m256d hs = _mm256_set1_pd(half_sigma);
    if (run == 1) {
        // Lanes [lo0, hi0, lo1, hi1]
        std::size_t j = 0;
        for (; j + 4 <= len; j += 4) {
            const __m256d v = _mm256_loadu_pd(buf + j);
            const __m256d lo = _mm256_permute_pd(v, 0x0);  // [l0,l0,l1,l1]
            const __m256d hi = _mm256_permute_pd(v, 0xF);  // [h0,h0,h1,h1]
            const __m256d mean =
                _mm256_add_pd(_mm256_mul_pd(ws, hi), _mm256_mul_pd(wc, lo));
            const __m256d diff = _mm256_mul_pd(hs, _mm256_sub_pd(hi, lo));
            _mm256_storeu_pd(buf + j, _mm256_blend_pd(mean, diff, 0xA));
        }
        for (; j < len; j += 2) {
            const double lo = buf[j], hi = buf[j + 1];
            buf[j] = w_set * hi + w_clear * lo;
            buf[j + 1] = half_sigma * (hi - lo);
        }
        return;
    }
    if (run == 2) {
        // Lanes [lo0, lo1, hi0, hi1]
        std::size_t j = 0;
        for (; j + 4 <= len; j += 4) {
            const __m256d v = _mm256_loadu_pd(buf + j);
            const __m256d lo = _mm256_permute2f128_pd(v, v, 0x00);
            const __m256d hi = _mm256_permute2f128_pd(v, v, 0x11);
            const __m256d mean =
                _mm256_add_pd(_mm256_mul_pd(ws, hi), _mm256_mul_pd(wc, lo));
            const __m256d diff = _mm256_mul_pd(hs, _mm256_sub_pd(hi, lo));
            _mm256_storeu_pd(buf + j, _mm256_blend_pd(mean, diff, 0xC));
        }
        for (; j < len; ++j) {
            // len < 4 with run 2 cannot happen for power-of-two tables
            const std::size_t base = j & ~std::size_t(3);
            const std::size_t o = j - base;
            if (o < 2) {
                const double lo = buf[base + o], hi = buf[base + 2 + o];
                buf[base + o] = w_set * hi + w_clear * lo;
                buf[base + 2 + o] = half_sigma * (hi - lo);
            }
        }
        return;
    }
    for (std::size_t base = 0; base < len; base += 2 * run) {
        std::size_t o = 0;
        for (; o + 4 <= run; o += 4) {
            double* plo = buf + base + o;
            double* phi = buf + base + run + o;
            const __m256d lo = _mm256_loadu_pd(plo);
            const __m256d hi = _mm256_loadu_pd(phi);
            const __m256d mean =
                _mm256_add_pd(_mm256_mul_pd(ws, hi), _mm256_mul_pd(wc, lo));
            const __m256d diff = _mm256_mul_pd(hs, _mm256_sub_pd(hi, lo));
            _mm256_storeu_pd(plo, mean);
            _mm256_storeu_pd(phi, diff);
        }
        for (; o < run; ++o) {
            const double lo = buf[base + o];
            const double hi = buf[base + run + o];
            buf[base + o] = w_set * hi + w_clear * lo;
            buf[base + run + o] = half_sigma * (hi - lo);
        }
    }
}

}  // namespace

namespace detail {
const VTable avx2_vtable = {
    weighted_sum_avx2,  masked_sums_avx2, pattern_scale_avx2,
    weight_extend_avx2, bias_pass_avx2,
};
}  // namespace detail

}  // namespace boolution::kern

#endif  // x86_64
