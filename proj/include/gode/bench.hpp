#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gode/graph.hpp"
#include "gode/params.hpp"

namespace gode {
namespace bench {

// Candidate lists per hyperparameter; every trial draws each applicable key
// independently and uniformly.
struct GridSpace {
    std::map<std::string, std::vector<ParamMap::Value>> candidates;
    std::size_t trials = 20;
    std::uint64_t master_seed = 0;

    // The default grid used throughout the benchmark (synthetic-graph lists).
    static GridSpace defaults();
};

// `trials` deterministic assignments for one detector; only its grid keys
// are sampled.
std::vector<ParamMap> sample_grid(const GridSpace& space, const std::string& detector);

struct Dataset {
    std::string id;
    AttributedGraph graph;
    std::optional<OutlierLabels> labels;
};

struct TrialResult {
    std::string dataset;
    std::string algorithm;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    ParamMap params;
    double auc = std::numeric_limits<double>::quiet_NaN();
    double ap = std::numeric_limits<double>::quiet_NaN();
    double recall_at_k = std::numeric_limits<double>::quiet_NaN();
    double auc_contextual = std::numeric_limits<double>::quiet_NaN();
    double auc_structural = std::numeric_limits<double>::quiet_NaN();
    double runtime_ms = 0.0;
    std::uint64_t peak_mem_bytes = 0;
    std::string status = "ok";  // ok | divergence | oom | error
    std::string message;

    bool ok() const { return status == "ok"; }
};

std::uint64_t trial_seed(std::uint64_t master_seed, const std::string& dataset,
                         const std::string& algorithm, std::size_t trial);

// Runs fit + scoring under a wall clock and a 10 ms resident-memory watcher;
// failures come back as records, not exceptions.
TrialResult run_trial(const Dataset& data, const std::string& algorithm,
                      const ParamMap& params, std::uint64_t seed);

struct BenchmarkConfig {
    GridSpace grid;
    std::size_t workers = 1;
};

// The full protocol: every (dataset, algorithm, trial) cell over a bounded
// worker pool. Metrics are bit-identical for a fixed master seed regardless
// of worker count.
std::vector<TrialResult> run_benchmark(const std::vector<Dataset>& datasets,
                                       const std::vector<std::string>& algorithms,
                                       const BenchmarkConfig& config);

struct Stats {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stddev = std::numeric_limits<double>::quiet_NaN();  // population (1/N)
    double max = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;
};

struct AggregateRow {
    std::string dataset;
    std::string algorithm;
    std::size_t successes = 0;
    std::size_t failures = 0;
    Stats auc, ap, recall_at_k, auc_contextual, auc_structural;
    Stats runtime_ms, peak_mem_bytes;
};

// Per (dataset, algorithm); successful trials only feed the stats,
// failures are counted alongside. Permutation-invariant over trial order.
std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& results);

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<TrialResult>& results);
std::vector<TrialResult> read_results_csv(const std::filesystem::path& path);

struct ScaleCell {
    std::size_t num_nodes = 0;
    std::string algorithm;
    double runtime_ms = 0.0;
    std::uint64_t peak_mem_bytes = 0;
    std::string status = "ok";
};

// Sizes ascending; graphs share generation/injection seeds across detectors
// (combined injection, m=10, n=1 per type, overlap sampling).
std::vector<ScaleCell> scalability_sweep(const std::vector<std::size_t>& sizes,
                                         const std::vector<std::string>& algorithms,
                                         std::uint64_t seed, std::size_t epochs = 10);

void write_scale_csv(const std::filesystem::path& path,
                     const std::vector<ScaleCell>& cells);

struct EpochPoint {
    std::string dataset;
    std::string algorithm;
    std::size_t epochs = 0;
    double auc = std::numeric_limits<double>::quiet_NaN();
    double runtime_ms = 0.0;
    std::uint64_t peak_mem_bytes = 0;
    std::string status = "ok";
    // First epoch count whose AUC gain over the previous one drops below
    // half a percentage point.
    bool converged_optimal = false;
    // Highest AUC across the epoch list.
    bool best = false;
};

// Epoch-budget study: one run per epoch count with shared seeds and default
// parameters; emits both the convergence marker and the best-score marker.
std::vector<EpochPoint> epoch_study(const Dataset& data,
                                    const std::vector<std::string>& algorithms,
                                    const std::vector<std::size_t>& epoch_list,
                                    std::uint64_t master_seed);

void write_epoch_csv(const std::filesystem::path& path,
                     const std::vector<EpochPoint>& points);

// Peak resident set sampling support (used by run_trial; exposed for tests).
std::uint64_t current_rss_bytes();

}  // namespace bench
}  // namespace gode
