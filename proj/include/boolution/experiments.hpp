#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "boolution/dynamics.hpp"
#include "boolution/io.hpp"
#include "boolution/verification.hpp"

namespace boolution {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct AssertionResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
};

struct ScenarioReport {
    std::string scenario;
    std::vector<std::pair<std::string, std::string>> stats;  // ordered
    std::vector<AssertionResult> assertions;
    // provenance
    std::string config_hash;
    std::string version;
    std::string kernel_backend;
    double wall_seconds = 0.0;
    // optional tabular payload (per-generation / per-cell rows)
    std::vector<std::string> table_header;
    std::vector<std::vector<std::string>> table_rows;

    bool all_pass() const {
        for (const auto& a : assertions)
            if (!a.pass) return false;
        return true;
    }
    void stat(const std::string& name, double v) {
        stats.emplace_back(name, format_double(v));
    }
    void stat(const std::string& name, const std::string& v) {
        stats.emplace_back(name, v);
    }
};

void write_report_csv(std::ostream& out, const ScenarioReport& report);
std::string report_to_json(const ScenarioReport& report);

// ---------------------------------------------------------------------------
// Experiment configuration (JSON file)
// ---------------------------------------------------------------------------
// Schema (unknown keys are errors):
//   {
//     "scenario": "fixation" | "monotone" | "waddington" | "ld" | "simulate",
//     "function": { ...function schema... } | "path/to/function.json",
//     "n": 2, "N": 50, "T": 1000,
//     "seeds": "0..99" | 7,
//     "mu0": "uniform" | "vertex:3" | [0.1, -0.2],
//     "heat_generations": 10, "post_generations": 5,   // waddington
//     "k": 3,                                          // waddington
//     "selection": true,                               // ld
//     "p0": "correlated" | "product" | [p_0, ...],     // ld
//     "record_every": 1,
//     "early_stop": true,
//     "out": "report.csv"
//   }
struct ExperimentConfig {
    std::string scenario;
    std::optional<BooleanFitnessFunction> function;
    int n = 0;
    int sample_size = 0;
    long steps = 0;
    SeedRange seeds{0, 0};
    std::string mu0_spec = "uniform";
    int waddington_k = 0;
    int heat_generations = 10;
    int post_generations = 5;
    bool ld_selection = true;
    std::vector<double> ld_p0;  // empty = "correlated" default
    int record_every = 1;
    bool early_stop = true;
    std::string out_path;
    std::string canonical_text;  // for hashing / reproducibility
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text);

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

// Ensemble of finite runs; reports fixation fraction, satisfying-fixation
// fraction, Pr[ext(mu^T) = 1+eps], and the initial-condition status
// ext(mu^0) > 1 + alpha.
ScenarioReport scenario_fixation(const BooleanFitnessFunction& f,
                                 const ProductPoint& mu0, int sample_size,
                                 long steps, const SeedRange& seeds);

// Deterministic run asserting sat(mu^t) >= 1 - n(1+eps)/(eps t sat(mu^0)) at
// every step; rejects non-monotone input.
ScenarioReport scenario_monotone_bound(const BooleanFitnessFunction& f,
                                       const ProductPoint& mu0, long steps);

// Threshold scenario under heat_generations of h=+1 followed by
// post_generations of h=-1, with the genetic-assimilation claims asserted.
ScenarioReport scenario_waddington(int n, int k,
                                   const FitnessLandscape& landscape,
                                   const WaddingtonMode& mode,
                                   int heat_generations, int post_generations);

// Recombination run reporting the LD series and the first generation where
// LD < 10*eps (weak landscapes).
ScenarioReport scenario_linkage(const BooleanFitnessFunction& f,
                                const GenotypeDistribution& p0, long steps,
                                bool selection_on);

// Runs the configured scenario once.
ScenarioReport run_scenario(const ExperimentConfig& config);

// Parameter sweep: one report per axis value ("N", "epsilon", "n", "T"),
// per-cell failures recorded without aborting the sweep.
std::vector<ScenarioReport> sweep(const ExperimentConfig& base,
                                  const std::string& axis,
                                  const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Ensemble helpers
// ---------------------------------------------------------------------------

// Worker count: BOOLUTION_THREADS when set, else hardware concurrency.
int thread_count();

// Runs fn(seed) for every seed in the range on a small pool and returns the
// results in seed order, so aggregate statistics never depend on the thread
// layout.
template <typename T, typename Fn>
std::vector<T> map_seeds(const SeedRange& seeds, Fn&& fn) {
    const std::uint64_t count = seeds.count();
    std::vector<T> results(count);
    const std::uint64_t workers = std::min<std::uint64_t>(
        static_cast<std::uint64_t>(thread_count()), count);
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < count; ++i)
            results[i] = fn(seeds.from + i);
        return results;
    }
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::uint64_t i;
                     (i = next.fetch_add(1)) < count && !failed.load();)
                    results[i] = fn(seeds.from + i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
    return results;
}

struct SeedOutcome {
    bool fixed = false;
    bool satisfied = false;
    bool extinct = false;
    long fixation_time = -1;
    double terminal_extension = 0.0;
    long density_violations = 0;
};

}  // namespace boolution
