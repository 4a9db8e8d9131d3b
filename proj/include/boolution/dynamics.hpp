#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "boolution/extension.hpp"
#include "boolution/function.hpp"
#include "boolution/types.hpp"

namespace boolution {

// Exact full-genotype recombination is offered up to this locus count.
inline constexpr int kMaxRecombinationN = 8;

// ---------------------------------------------------------------------------
// Finite-sample state
// ---------------------------------------------------------------------------

// Empirical allele frequencies of an N-individual sample.  Backed by integer
// +1 counts so grid membership and vertex tests are exact.
class EmpiricalFrequencies {
  public:
    EmpiricalFrequencies(std::vector<int> plus_counts, int sample_size);

    int n() const { return static_cast<int>(counts_.size()); }
    int sample_size() const { return sample_size_; }
    int plus_count(int i) const { return counts_[static_cast<std::size_t>(i)]; }

    double nu(int i) const {
        return 2.0 * counts_[static_cast<std::size_t>(i)] / sample_size_ - 1.0;
    }
    ProductPoint to_product_point() const;

    bool is_vertex() const {
        for (int c : counts_)
            if (c != 0 && c != sample_size_) return false;
        return true;
    }
    bool locus_fixed(int i) const {
        const int c = counts_[static_cast<std::size_t>(i)];
        return c == 0 || c == sample_size_;
    }

  private:
    std::vector<int> counts_;
    int sample_size_;
};

// ---------------------------------------------------------------------------
// Per-generation instrumentation
// ---------------------------------------------------------------------------

struct StepRecord {
    long t = 0;
    std::vector<double> mu_before;   // mu^t
    std::vector<double> nu;          // nu^t (equals mu_before in infinite mode)
    std::vector<int> nu_counts;      // integer +1 counts backing nu
    std::vector<double> mu_after;    // mu^{t+1}
    double ext_mu = 0.0;             // extension at mu^t
    double ext_nu = 0.0;             // extension at nu^t
    double ext_mu_after = 0.0;       // extension at mu^{t+1}
    double linear_mass = 0.0;        // sum_i f^(i;nu)^2
    double sat_prob = 0.0;           // satisfaction probability at mu^t
    double sampling_increment = 0.0;   // ext_nu - ext_mu
    double selection_increment = 0.0;  // ext_mu_after - ext_nu
};

struct RunOptions {
    int record_every = 1;     // 0 = keep no per-step records
    bool early_stop = true;   // stop once nu reaches a vertex
    bool verify = true;       // assert the density inequality per step
    // Called for every step whether or not it is recorded.
    std::function<void(const StepRecord&)> observer;
};

struct Trajectory {
    // config snapshot
    std::optional<BooleanFitnessFunction> function;
    int n = 0;
    int sample_size = 0;      // 0 for the infinite-population process
    long requested_steps = 0;
    std::uint64_t seed = 0;
    bool finite = false;

    std::vector<StepRecord> records;
    int record_every = 1;
    long steps_taken = 0;

    std::vector<double> terminal_mu;
    bool fixed = false;            // nu reached a vertex
    long fixation_time = -1;
    double fixation_value = 0.0;   // extension at the absorbing vertex
    bool extinct = false;          // lethal landscape hit E[f] = 0
    long extinction_time = -1;
};

// ---------------------------------------------------------------------------
// One-step operations
// ---------------------------------------------------------------------------

// mu'_i = E_p[f x_i] / E_p[f], computed exactly.  On the enumeration backend
// the result is cross-checked against the linear-coefficient form
// mu'_i - p_i = sigma_i f^(i;p) / E_p[f].  Extinction error when a lethal
// landscape has zero satisfaction probability.
ProductPoint selection_step(const BooleanFitnessFunction& f,
                            const ProductPoint& p,
                            EvalBackend backend = EvalBackend::Auto);

struct SelectionDetail {
    ProductPoint mu_after;
    double mean_fitness = 0.0;
    double sat_probability = 0.0;
    double select2_residual = 0.0;  // worst |direct - coefficient route|
};
SelectionDetail selection_step_detail(const BooleanFitnessFunction& f,
                                      const ProductPoint& p,
                                      EvalBackend backend = EvalBackend::Auto);

// Per-coordinate binomial sampling of N individuals.  Distributionally
// identical to drawing N genotypes and averaging each locus, since the loci
// of a product distribution are independent and only the marginal
// frequencies enter the selection rule; this saves the factor-N genotype
// storage.  Stream discipline: locus i of generation t reads exactly N
// uniforms from stream (seed, t, i).
EmpiricalFrequencies sampling_step(const ProductPoint& p, int sample_size,
                                   std::uint64_t seed, long generation);

struct GenerationResult {
    EmpiricalFrequencies nu;
    ProductPoint mu_after;
};
GenerationResult generation(const BooleanFitnessFunction& f,
                            const ProductPoint& p, int sample_size,
                            std::uint64_t seed, long t);

// ---------------------------------------------------------------------------
// Whole-trajectory runners
// ---------------------------------------------------------------------------

// Deterministic infinite-population recurrence mu^{t+1} = S(mu^t).
Trajectory run_infinite(const BooleanFitnessFunction& f,
                        const ProductPoint& mu0, long steps,
                        const RunOptions& options = {});

// Finite-population process: sample, then select, T times (or until the
// sample hits a vertex, which is absorbing).  Lethal extinction is recorded
// as a terminal outcome, not thrown.
Trajectory run_finite(const BooleanFitnessFunction& f, const ProductPoint& mu0,
                      int sample_size, long steps, std::uint64_t seed,
                      const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Waddington scenario
// ---------------------------------------------------------------------------

struct WaddingtonGeneration {
    long t = 0;
    int h = -1;               // environment driving this generation's selection
    double sat_heat = 0.0;    // satisfaction probability under h = +1
    double sat_normal = 0.0;  // satisfaction probability under h = -1
    double mean_mu = 0.0;
    std::vector<double> mu;
    bool extinct = false;
};

struct WaddingtonMode {
    bool finite = false;
    int sample_size = 0;
    std::uint64_t seed = 0;
    static WaddingtonMode infinite() { return {}; }
    static WaddingtonMode finite_population(int n_individuals,
                                            std::uint64_t seed) {
        return {true, n_individuals, seed};
    }
};

// Runs the threshold scenario under a per-generation environment schedule.
// Selection in generation t uses h = h_schedule[t]; the report also carries
// the counterfactual satisfaction under normal environment h = -1.
std::vector<WaddingtonGeneration> waddington_scenario(
    int n, int k, const std::vector<int>& h_schedule,
    const FitnessLandscape& landscape, const WaddingtonMode& mode,
    const ProductPoint& mu0);

// ---------------------------------------------------------------------------
// Full-genotype recombination (linkage-disequilibrium mode)
// ---------------------------------------------------------------------------

class GenotypeDistribution {
  public:
    explicit GenotypeDistribution(std::vector<double> probabilities);

    static GenotypeDistribution product(const ProductPoint& mu);

    int n() const { return n_; }
    double operator[](std::size_t g) const { return p_[g]; }
    const std::vector<double>& probabilities() const { return p_; }

    // Per-locus mean of x_i.
    double marginal_mean(int i) const;
    // L-infinity distance to the product of the marginals.
    double linkage_disequilibrium() const;

  private:
    int n_;
    std::vector<double> p_;
};

struct RecombinationStep {
    GenotypeDistribution distribution;
    double linkage_disequilibrium = 0.0;
};

// One generation = optional fitness reweighting p(g) f(g)/Z, then free
// recombination under random mating.  Returns the T+1 states including the
// start.  Capability error for n > kMaxRecombinationN; extinction error if
// reweighting by a lethal landscape annihilates the distribution.
std::vector<RecombinationStep> recombination_dynamics(
    const BooleanFitnessFunction& f, const GenotypeDistribution& p0,
    long steps, bool selection_on);

// One free-recombination update (exported for tests).
GenotypeDistribution recombine_once(const GenotypeDistribution& p);

}  // namespace boolution
