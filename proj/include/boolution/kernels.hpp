#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

// Data-parallel inner loops over tables indexed by genotype mask.  Every
// kernel has a scalar reference implementation and (on x86-64) an AVX2
// variant; the active variant is chosen once at startup and can be forced
// for equivalence testing.
//
// Index conventions shared with the rest of the library:
//   * a table of length 2^n is indexed by the genotype mask, locus 0 = LSB,
//     bit set <=> allele +1;
//   * `run` parameters are powers of two: for run = 2^b, element j belongs
//     to the "set" phase iff bit b of j is set, i.e. (j / run) & 1.
//
// Determinism notes: pattern_scale, weight_extend and bias_pass perform
// independent per-element arithmetic, so scalar and AVX2 agree bitwise.
// weighted_sum and masked_sums use Neumaier compensated accumulation; the
// AVX2 variants keep four independent lanes and combine them at the end, so
// they agree with scalar to roundoff (and exactly whenever every partial sum
// is representable, e.g. all-equal dyadic weights).

namespace boolution::kern {

enum class Backend { Scalar, Avx2 };

// Currently active backend.
Backend active_backend();
const char* backend_name(Backend b);

// Force a backend (tests / BOOLUTION_KERNELS env).  Passing nullopt restores
// automatic selection.  Throws if the requested backend is unsupported here.
void force_backend(std::optional<Backend> b);

struct MaskedSums {
    double in_sum;   // sum of vals[j] over j with bit j set
    double out_sum;  // sum over j with bit j clear
};

// Compensated dot product sum_j a[j]*w[j].
double weighted_sum(const double* a, const double* w, std::size_t len);

// Compensated split sum of vals[] by the bitset `bits` (LSB-first packing:
// bit j of the stream is word j/64, position j%64).
MaskedSums masked_sums(const double* vals, const std::uint64_t* bits,
                       std::size_t len);

// In place: buf[j] *= (bit of j set ? c_set : c_clear), run = 2^b.
void pattern_scale(double* buf, std::size_t len, std::size_t run,
                   double c_set, double c_clear);

// Weight-table doubling step: reads buf[0..half), writes buf[0..2*half) with
// buf[half+j] = buf[j]*p_set and buf[j] = buf[j]*p_clear.
void weight_extend(double* buf, std::size_t half, double p_set,
                   double p_clear);

// One butterfly pass of the biased transform along the locus with run = 2^b:
// for each pair (lo = buf[m], hi = buf[m+run]) with bit b of m clear,
//   buf[m]     <- w_set*hi + w_clear*lo        (expectation over the locus)
//   buf[m+run] <- half_sigma*(hi - lo)         (difference component)
void bias_pass(double* buf, std::size_t len, std::size_t run, double w_set,
               double w_clear, double half_sigma);

// Implementation tables (internal).
struct VTable {
    double (*weighted_sum)(const double*, const double*, std::size_t);
    MaskedSums (*masked_sums)(const double*, const std::uint64_t*,
                              std::size_t);
    void (*pattern_scale)(double*, std::size_t, std::size_t, double, double);
    void (*weight_extend)(double*, std::size_t, double, double);
    void (*bias_pass)(double*, std::size_t, std::size_t, double, double,
                      double);
};

namespace detail {
extern const VTable scalar_vtable;
#if defined(__x86_64__) || defined(_M_X64)
extern const VTable avx2_vtable;
#endif
}  // namespace detail

}  // namespace boolution::kern
