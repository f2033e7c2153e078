// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftft/cartography.hpp"
#include "ftft/cost.hpp"
#include "ftft/toy.hpp"
#include "ftft/transfer.hpp"

namespace ftft::pipeline {

enum class StopKind { none, patience };
enum class StopMetric { hard_slice_accuracy, id_accuracy, mean_of_listed };

struct StopPolicy {
    StopKind kind = StopKind::none;
    std::size_t k = 2;
    StopMetric metric = StopMetric::hard_slice_accuracy;
};

StopMetric parse_stop_metric(const std::string& name);

struct StopPoint {
    std::size_t best = 0;
    std::size_t stop = 0;
    bool triggered = false;

    bool operator==(const StopPoint&) const = default;
};

// Online patience rule: a value improves when it beats the best so far by
// more than 1e-9; k consecutive non-improvements stop the run.
class PatienceTracker {
public:
    explicit PatienceTracker(std::size_t k);
    // Feeds the next checkpoint value; returns true once training should stop.
    bool update(double value);
    StopPoint point() const { return {best_, index_, triggered_}; }

private:
    std::size_t k_;
    std::size_t index_ = 0;
    std::size_t seen_ = 0;
    std::size_t best_ = 0;
    double best_value_ = 0.0;
    std::size_t since_best_ = 0;
    bool triggered_ = false;
};

StopPoint early_stop(const std::vector<double>& series, std::size_t k);

double metric_value(const toy::CheckpointMetrics& m, StopMetric metric);
std::vector<double> metric_series(const std::vector<toy::CheckpointMetrics>& ms, StopMetric metric);

struct ModelConfig {
    std::string name;
    toy::ModelSpec spec;
    toy::TrainConfig train;
};

cost::RunCost full_run_cost(const ModelConfig& m, std::uint64_t num_params);

struct FtftReport {
    std::string method;
    std::string main_model;
    std::string ref_model;  // empty for ERM
    std::optional<toy::RunResult> reference_run;
    std::optional<cartography::DataMap> map;
    std::string map_path;
    std::optional<cartography::SubsetKind> subset_kind;
    std::size_t subset_size = 0;
    toy::RunResult main_run;
    StopPolicy stop;
    std::size_t best_checkpoint = 0;
    std::size_t stop_checkpoint = 0;
    std::size_t charged_checkpoints = 0;
    cost::PipelineCost costs;
    std::vector<std::string> warnings;

    const std::vector<toy::CheckpointMetrics>& metric_curves() const { return main_run.metrics; }
};

// Full-data training of the main model; ERM(ES) when stop.kind is patience.
FtftReport run_erm(const toy::SyntheticDataset& ds, const ModelConfig& main, const StopPolicy& stop,
                   const cost::RunCost& baseline);

// Reference trained full-length, map at q, main model trained full-length on
// the selected subset.
FtftReport run_cartography(const toy::SyntheticDataset& ds, const ModelConfig& ref, const ModelConfig& main,
                           double q, cartography::SubsetKind kind, const cost::RunCost& baseline,
                           const toy::RunResult* reference = nullptr);

// Reference trained full-length, ambiguous subset at q, main model stopped by
// patience. Warns (does not fail) when the reference is not cheaper.
FtftReport run_ftft(const toy::SyntheticDataset& ds, const ModelConfig& ref, const ModelConfig& main, double q,
                    const StopPolicy& stop, const cost::RunCost& baseline,
                    const toy::RunResult* reference = nullptr);

struct BenchmarkConfig {
    std::optional<std::uint64_t> dataset_seed;  // unset: each run seed generates its own dataset
    std::size_t num_instances = 3000;
    int num_classes = 2;
    toy::TierMix mix;
    toy::GeneratorParams generator;
    std::map<std::string, ModelConfig> models;
    std::string reference = "linear";
    std::string main = "mlp";
    std::string baseline = "mlp";
    double q = cartography::kDefaultQ;
    std::vector<cartography::SubsetKind> subset_kinds = {cartography::SubsetKind::random,
                                                         cartography::SubsetKind::ambiguous};
    StopPolicy stop{StopKind::patience, 2, StopMetric::hard_slice_accuracy};
    std::vector<std::uint64_t> seeds;
    std::vector<double> easy_ratio_qs = {0.10, 0.25, 0.33, 0.50};
    double trajectory_split = transfer::kDefaultSplit;

    const ModelConfig& model(const std::string& name) const;
};

// Throws UsageError for missing or invalid fields ("seeds required" unless
// require_seeds is false).
BenchmarkConfig parse_benchmark_config(const std::string& json_text, bool require_seeds = true);
BenchmarkConfig default_benchmark_config();

struct ReferenceOutcome {
    toy::RunResult run;
    cartography::DataMap map;
    transfer::TrajectorySummary trajectory;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::map<std::string, ReferenceOutcome> references;  // keyed by model config name
    std::vector<transfer::EasyRatioRow> easy_ratios;
    std::vector<FtftReport> reports;  // ERM, ERM(ES), DM-<kind>..., FTFT

    const FtftReport& report(const std::string& method) const;
};

struct BenchmarkResult {
    BenchmarkConfig config;
    std::vector<SeedOutcome> seeds;
};

SeedOutcome run_seed(const BenchmarkConfig& config, std::uint64_t seed);
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

// Writes maps, dynamics, metrics, cost and summary CSVs and SVG curves.
void write_bundle(const BenchmarkResult& result, const std::string& dir);

std::string method_slug(const std::string& method);
CsvTable summary_csv(const BenchmarkResult& result);

}  // namespace ftft::pipeline
