#include <atomic>
#include <cstdlib>
#include <cstring>

#include "boolution/errors.hpp"
#include "boolution/kernels.hpp"

namespace boolution::kern {
namespace {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const VTable* table_for(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return &detail::scalar_vtable;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return &detail::avx2_vtable;
#else
            break;
#endif
    }
    return nullptr;
}

Backend pick_default() {
    if (const char* env = std::getenv("BOOLUTION_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_supported())
            return Backend::Avx2;
    }
    return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

struct State {
    std::atomic<const VTable*> table;
    std::atomic<Backend> backend;
    State() {
        const Backend b = pick_default();
        backend.store(b);
        table.store(table_for(b));
    }
};

State& state() {
    static State s;
    return s;
}

const VTable& active() { return *state().table.load(std::memory_order_relaxed); }

}  // namespace

Backend active_backend() { return state().backend.load(); }

const char* backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(std::optional<Backend> b) {
    const Backend chosen = b.value_or(pick_default());
    const VTable* t = table_for(chosen);
    if (t == nullptr || (chosen == Backend::Avx2 && !avx2_supported()))
        throw_capability("kernel backend not supported on this machine");
    state().backend.store(chosen);
    state().table.store(t);
}

double weighted_sum(const double* a, const double* w, std::size_t len) {
    return active().weighted_sum(a, w, len);
}

MaskedSums masked_sums(const double* vals, const std::uint64_t* bits,
                       std::size_t len) {
    return active().masked_sums(vals, bits, len);
}

void pattern_scale(double* buf, std::size_t len, std::size_t run,
                   double c_set, double c_clear) {
    active().pattern_scale(buf, len, run, c_set, c_clear);
}

void weight_extend(double* buf, std::size_t half, double p_set,
                   double p_clear) {
    active().weight_extend(buf, half, p_set, p_clear);
}

void bias_pass(double* buf, std::size_t len, std::size_t run, double w_set,
               double w_clear, double half_sigma) {
    active().bias_pass(buf, len, run, w_set, w_clear, half_sigma);
}

}  // namespace boolution::kern
