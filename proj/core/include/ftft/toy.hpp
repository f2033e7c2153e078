// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ftft/dynamics.hpp"
#include "ftft/format.hpp"

namespace ftft {
class Rng;
}

namespace ftft::toy {

using dynamics::InstanceId;

enum class Tier { simple, ambiguous_band, difficult };
enum class Split { train, id_eval, hard_slice_eval };

std::string_view to_string(Tier t);
std::string_view to_string(Split s);

struct TierMix {
    double simple = 0.40;
    double ambiguous_band = 0.40;
    double difficult = 0.20;
};

// Geometry of the generator. Features are [a0, a1, b0, b1]: the "a" plane
// carries a class-centroid cue, the "b" plane a checkerboard whose cell parity
// is the label.
struct GeneratorParams {
    double simple_radius = 4.0;   // centroid distance of simple clusters
    double simple_noise = 0.7;    // per-axis Gaussian spread of simple clusters
    double simple_conflict = 0.0; // share of simple instances placed in a wrong-parity cell
    double band_cue = 0.12;       // max centroid offset of band instances
    double band_cue_floor = 0.5;  // band offset drawn from band_cue * U(floor, 1)
    double band_noise = 0.0;      // per-axis Gaussian spread of band instances
    double cell_margin = 0.25;    // inset of checkerboard points from cell edges
    int grid_cells = 0;           // checkerboard cells per axis, 0 means num_classes
    double train_fraction = 0.8;
    double hard_slice_fraction = 0.2;  // extra difficult-tier instances, relative to num_instances
};

struct SyntheticDataset {
    std::string name;
    std::uint64_t seed = 0;
    int num_classes = 2;
    Eigen::MatrixXd features;  // one row per instance, row index == instance id
    std::vector<int> labels;
    std::vector<Tier> tiers;
    std::vector<Split> splits;
    std::vector<InstanceId> train, id_eval, hard_slice;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
};

SyntheticDataset generate_dataset(std::uint64_t seed, std::size_t num_instances, int num_classes, TierMix mix,
                                  const GeneratorParams& params = {});

// id,label,tier,split,f0..fD
CsvTable dataset_csv(const SyntheticDataset& ds);
SyntheticDataset dataset_from_csv(const std::string& text, std::string name = "dataset");

enum class ModelKind { linear, mlp };

ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind k);

struct ModelSpec {
    ModelKind kind = ModelKind::linear;
    int hidden_units = 32;     // mlp only
    double init_scale = 1.0;   // std of first-layer weights (mlp); linear starts at zero

    std::size_t num_params(std::size_t dim, int num_classes) const;
};

// Softmax regression or one tanh hidden layer, parameters kept in one flat
// vector so optimizers and gradient checks see a single array.
class Model {
public:
    Model(ModelSpec spec, std::size_t dim, int num_classes);

    void init(Rng& rng);

    Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd probabilities(const Eigen::MatrixXd& x) const;

    // Mean cross-entropy over the rows of x; fills grad when non-null.
    double loss(const Eigen::MatrixXd& x, const std::vector<int>& y, Eigen::VectorXd* grad = nullptr) const;

    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }
    const ModelSpec& spec() const { return spec_; }
    std::string digest() const;

private:
    ModelSpec spec_;
    Eigen::Index dim_;
    Eigen::Index classes_;
    Eigen::VectorXd params_;
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z);

struct TrainConfig {
    std::size_t max_steps = 3000;
    std::size_t batch_size = 32;
    double peak_lr = 0.5;
    double warmup_fraction = 0.10;
    std::size_t checkpoint_every = 150;
    double weight_decay = 0.0;  // decoupled, 0 disables
    std::uint64_t seed = 0;
    std::optional<std::vector<InstanceId>> subset;

    std::size_t num_checkpoints() const { return checkpoint_every ? max_steps / checkpoint_every : 0; }
};

void validate(const TrainConfig& c);

// Linear warmup from 0 to peak_lr, then linear decay to 0 at max_steps.
double lr_at(const TrainConfig& c, std::size_t step);

struct CheckpointMetrics {
    double id_accuracy = 0.0;
    double hard_slice_accuracy = 0.0;
};

struct RunResult {
    dynamics::TrainingDynamics dynamics;
    std::vector<CheckpointMetrics> metrics;
    std::string final_params_digest;
    std::size_t steps_trained = 0;
    std::size_t checkpoints_planned = 0;
};

// Called after each checkpoint is recorded; returning false ends training.
using CheckpointHook = std::function<bool(std::size_t index, const CheckpointMetrics&)>;

RunResult train(const SyntheticDataset& ds, const ModelSpec& spec, const TrainConfig& config,
                const CheckpointHook& hook = {});

// Full-data training, the reference run of a cartography pipeline.
RunResult run_reference(const SyntheticDataset& ds, const ModelSpec& spec, TrainConfig config);

CsvTable metrics_csv(const std::vector<CheckpointMetrics>& metrics);

}  // namespace ftft::toy
