// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "ftft/error.hpp"
#include "ftft/rng.hpp"
#include "ftft/toy.hpp"

namespace ftft::toy {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using CMap = Eigen::Map<const MatrixXd>;
using MMap = Eigen::Map<MatrixXd>;

ModelKind parse_model_kind(std::string_view name) {
    if (name == "linear") return ModelKind::linear;
    if (name == "mlp") return ModelKind::mlp;
    throw UsageError("unknown model kind \"" + std::string(name) + "\" (expected linear or mlp)");
}

std::string_view to_string(ModelKind k) { return k == ModelKind::linear ? "linear" : "mlp"; }

std::size_t ModelSpec::num_params(std::size_t dim, int num_classes) const {
    const auto c = static_cast<std::size_t>(num_classes);
    if (kind == ModelKind::linear) return dim * c + c;
    const auto h = static_cast<std::size_t>(hidden_units);
    return dim * h + h + h * c + c;
}

Model::Model(ModelSpec spec, std::size_t dim, int num_classes)
    : spec_(spec), dim_(static_cast<Index>(dim)), classes_(num_classes) {
    if (spec_.kind == ModelKind::mlp && spec_.hidden_units < 1) throw UsageError("hidden_units must be positive");
    params_ = VectorXd::Zero(static_cast<Index>(spec_.num_params(dim, num_classes)));
}

void Model::init(Rng& rng) {
    params_.setZero();
    if (spec_.kind == ModelKind::linear) return;
    const Index h = spec_.hidden_units;
    double* p = params_.data();
    for (Index i = 0; i < dim_ * h; ++i) p[i] = rng.normal(0.0, spec_.init_scale);
    double* w2 = p + dim_ * h + h;
    const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (Index i = 0; i < h * classes_; ++i) w2[i] = rng.normal(0.0, s2);
}

Eigen::MatrixXd softmax_rows(const MatrixXd& z) {
    MatrixXd p = z.colwise() - z.rowwise().maxCoeff();
    p = p.array().exp();
    p.array().colwise() /= p.rowwise().sum().array();
    return p;
}

MatrixXd Model::logits(const MatrixXd& x) const {
    const double* p = params_.data();
    if (spec_.kind == ModelKind::linear) {
        CMap w(p, dim_, classes_);
        Eigen::Map<const Eigen::RowVectorXd> b(p + dim_ * classes_, classes_);
        return (x * w).rowwise() + b;
    }
    const Index h = spec_.hidden_units;
    CMap w1(p, dim_, h);
    Eigen::Map<const Eigen::RowVectorXd> b1(p + dim_ * h, h);
    CMap w2(p + dim_ * h + h, h, classes_);
    Eigen::Map<const Eigen::RowVectorXd> b2(p + dim_ * h + h + h * classes_, classes_);
    MatrixXd hid = ((x * w1).rowwise() + b1).array().tanh();
    return (hid * w2).rowwise() + b2;
}

MatrixXd Model::probabilities(const MatrixXd& x) const { return softmax_rows(logits(x)); }

double Model::loss(const MatrixXd& x, const std::vector<int>& y, VectorXd* grad) const {
    const Index n = x.rows();
    const double* p = params_.data();
    MatrixXd hid;
    MatrixXd z;
    const Index h = spec_.hidden_units;
    if (spec_.kind == ModelKind::linear) {
        z = logits(x);
    } else {
        CMap w1(p, dim_, h);
        Eigen::Map<const Eigen::RowVectorXd> b1(p + dim_ * h, h);
        CMap w2(p + dim_ * h + h, h, classes_);
        Eigen::Map<const Eigen::RowVectorXd> b2(p + dim_ * h + h + h * classes_, classes_);
        hid = ((x * w1).rowwise() + b1).array().tanh();
        z = (hid * w2).rowwise() + b2;
    }

    // log-sum-exp per row
    const Eigen::VectorXd zmax = z.rowwise().maxCoeff();
    const Eigen::VectorXd lse = ((z.colwise() - zmax).array().exp().rowwise().sum().log()).matrix() + zmax;
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += lse(i) - z(i, y[static_cast<std::size_t>(i)]);
    const double loss = total / static_cast<double>(n);
    if (!grad) return loss;

    // dL/dz = (softmax - onehot) / n
    MatrixXd g = (z.colwise() - lse).array().exp();
    for (Index i = 0; i < n; ++i) g(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    g /= static_cast<double>(n);

    grad->resize(params_.size());
    double* gp = grad->data();
    if (spec_.kind == ModelKind::linear) {
        MMap(gp, dim_, classes_) = x.transpose() * g;
        Eigen::Map<Eigen::RowVectorXd>(gp + dim_ * classes_, classes_) = g.colwise().sum();
        return loss;
    }
    CMap w2(p + dim_ * h + h, h, classes_);
    MMap(gp + dim_ * h + h, h, classes_) = hid.transpose() * g;
    Eigen::Map<Eigen::RowVectorXd>(gp + dim_ * h + h + h * classes_, classes_) = g.colwise().sum();
    const MatrixXd dh = ((g * w2.transpose()).array() * (1.0 - hid.array().square())).matrix();
    MMap(gp, dim_, h) = x.transpose() * dh;
    Eigen::Map<Eigen::RowVectorXd>(gp + dim_ * h, h) = dh.colwise().sum();
    return loss;
}

std::string Model::digest() const {
    // FNV-1a over the raw parameter bytes
    std::uint64_t hash = 1469598103934665603ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(params_.data());
    for (std::size_t i = 0; i < static_cast<std::size_t>(params_.size()) * sizeof(double); ++i) {
        hash ^= bytes[i];
        hash *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", hash);
}

void validate(const TrainConfig& c) {
    if (c.max_steps == 0) throw UsageError("max_steps must be positive");
    if (c.batch_size == 0) throw UsageError("batch_size must be positive");
    if (!(c.peak_lr > 0.0)) throw UsageError("peak_lr must be positive");
    if (!(c.warmup_fraction >= 0.0 && c.warmup_fraction < 1.0)) throw UsageError("warmup_fraction must be in [0, 1)");
    if (c.checkpoint_every == 0 || c.checkpoint_every > c.max_steps)
        throw UsageError("checkpoint_every must be in [1, max_steps]");
    if (c.num_checkpoints() < 2) throw UsageError("a run needs at least 2 checkpoints");
    if (c.weight_decay < 0.0) throw UsageError("weight_decay must be non-negative");
}

double lr_at(const TrainConfig& c, std::size_t step) {
    const auto warm = static_cast<std::size_t>(std::floor(c.warmup_fraction * static_cast<double>(c.max_steps)));
    if (step < warm) return c.peak_lr * static_cast<double>(step) / static_cast<double>(warm);
    if (step >= c.max_steps) return 0.0;
    return c.peak_lr * static_cast<double>(c.max_steps - step) / static_cast<double>(c.max_steps - warm);
}

namespace {

MatrixXd gather(const MatrixXd& x, const std::vector<InstanceId>& rows) {
    MatrixXd out(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(static_cast<Index>(rows[i]));
    return out;
}

std::vector<int> gather_labels(const std::vector<int>& y, const std::vector<InstanceId>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(y[r]);
    return out;
}

double accuracy(const Model& m, const MatrixXd& x, const std::vector<int>& y) {
    if (y.empty()) return 0.0;
    const MatrixXd z = m.logits(x);
    std::size_t hit = 0;
    for (Index i = 0; i < z.rows(); ++i) {
        Index arg;
        z.row(i).maxCoeff(&arg);
        if (arg == y[static_cast<std::size_t>(i)]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

}  // namespace

RunResult train(const SyntheticDataset& ds, const ModelSpec& spec, const TrainConfig& config,
                const CheckpointHook& hook) {
    validate(config);
    if (ds.train.empty()) throw UsageError("dataset has no training instances");

    std::vector<InstanceId> pool = ds.train;
    if (config.subset) {
        pool = *config.subset;
        std::sort(pool.begin(), pool.end());
        pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
        if (pool.empty()) throw UsageError("training subset is empty");
        for (auto id : pool)
            if (id >= ds.size() || ds.splits[id] != Split::train)
                throw DataError("subset id " + std::to_string(id) + " is not a training instance");
    }

    Rng rng(config.seed);
    Model model(spec, ds.dim(), ds.num_classes);
    model.init(rng);

    const MatrixXd x_train = gather(ds.features, ds.train);
    const std::vector<int> y_train = gather_labels(ds.labels, ds.train);
    const MatrixXd x_id = gather(ds.features, ds.id_eval);
    const std::vector<int> y_id = gather_labels(ds.labels, ds.id_eval);
    const MatrixXd x_hard = gather(ds.features, ds.hard_slice);
    const std::vector<int> y_hard = gather_labels(ds.labels, ds.hard_slice);

    RunResult res;
    res.checkpoints_planned = config.num_checkpoints();
    res.dynamics.run_id = fmt::format("{}-{}-s{}{}", ds.name, to_string(spec.kind), config.seed,
                                      config.subset ? "-subset" : "");
    res.dynamics.model_name = std::string(to_string(spec.kind));
    res.dynamics.num_params = spec.num_params(ds.dim(), ds.num_classes);
    res.dynamics.dataset_name = ds.name;
    res.dynamics.records.resize(ds.train.size());
    for (std::size_t i = 0; i < ds.train.size(); ++i) {
        res.dynamics.records[i].id = ds.train[i];
        res.dynamics.records[i].gold = y_train[i];
        res.dynamics.records[i].p_true.reserve(res.checkpoints_planned);
    }

    std::vector<InstanceId> order = pool;
    rng.shuffle(order);
    std::size_t pos = 0;
    VectorXd grad;
    std::vector<InstanceId> batch;
    for (std::size_t step = 0; step < config.max_steps; ++step) {
        if (pos >= order.size()) {
            order = pool;
            rng.shuffle(order);
            pos = 0;
        }
        const std::size_t end = std::min(order.size(), pos + config.batch_size);
        batch.assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(end));
        pos = end;

        const double loss = model.loss(gather(ds.features, batch), gather_labels(ds.labels, batch), &grad);
        if (!std::isfinite(loss)) throw DataError(fmt::format("non-finite loss at step {}", step));
        const double lr = lr_at(config, step);
        if (config.weight_decay > 0.0) model.params() -= (lr * config.weight_decay) * model.params().eval();
        model.params() -= lr * grad;
        res.steps_trained = step + 1;

        if ((step + 1) % config.checkpoint_every != 0) continue;
        const MatrixXd probs = model.probabilities(x_train);
        for (std::size_t i = 0; i < ds.train.size(); ++i)
            res.dynamics.records[i].p_true.push_back(probs(static_cast<Index>(i), y_train[i]));
        CheckpointMetrics m{accuracy(model, x_id, y_id), accuracy(model, x_hard, y_hard)};
        res.metrics.push_back(m);
        if (hook && !hook(res.metrics.size() - 1, m)) break;
    }
    res.dynamics.num_checkpoints = res.metrics.size();
    res.final_params_digest = model.digest();
    return res;
}

RunResult run_reference(const SyntheticDataset& ds, const ModelSpec& spec, TrainConfig config) {
    config.subset.reset();
    return train(ds, spec, config);
}

CsvTable metrics_csv(const std::vector<CheckpointMetrics>& metrics) {
    CsvTable t({"checkpoint", "id_accuracy", "hard_slice_accuracy"});
    for (std::size_t i = 0; i < metrics.size(); ++i)
        t.add_row({std::to_string(i), format_exact(metrics[i].id_accuracy), format_exact(metrics[i].hard_slice_accuracy)});
    return t;
}

}  // namespace ftft::toy
