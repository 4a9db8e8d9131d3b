#pragma once

#include <cstdint>

namespace boolution {

// Counter-based RNG discipline: every (seed, generation, locus) triple owns
// an independent stream derived by hashing the triple, and the binomial
// sampler consumes exactly N uniforms from its stream.  Consequences relied
// on elsewhere: trajectories are reproducible from the seed alone, ensembles
// can run generations on any thread layout, and adding instrumentation can
// never perturb the draws of an existing site.
class CounterStream {
  public:
    explicit CounterStream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_in(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Uniform integer in [0, bound) by rejection-free scaling (bias is
    // negligible for the bounds used here, all far below 2^32).
    std::uint64_t next_below(std::uint64_t bound) {
        return next_u64() % bound;
    }

  private:
    std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline CounterStream stream_for(std::uint64_t seed, std::uint64_t generation,
                                std::uint64_t locus) {
    return CounterStream(mix64(mix64(mix64(seed) ^ generation) ^ locus));
}

// Number of successes among N Bernoulli(p) trials; consumes exactly N
// uniforms so stream positions are input-independent.
inline int binomial_count(CounterStream& stream, int n_trials, double p) {
    int count = 0;
    for (int j = 0; j < n_trials; ++j)
        if (stream.next_unit() < p) ++count;
    return count;
}

}  // namespace boolution
