// SPDX-License-Identifier: Apache-2.0
#include "ftft/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "ftft/error.hpp"

namespace ftft::pipeline {

StopMetric parse_stop_metric(const std::string& name) {
    if (name == "hard_slice_accuracy") return StopMetric::hard_slice_accuracy;
    if (name == "id_accuracy") return StopMetric::id_accuracy;
    if (name == "mean_of_listed") return StopMetric::mean_of_listed;
    throw UsageError("unknown stop metric \"" + name + "\"");
}

PatienceTracker::PatienceTracker(std::size_t k) : k_(k) {
    if (k < 1) throw UsageError("patience k must be at least 1");
}

bool PatienceTracker::update(double value) {
    if (triggered_) throw std::logic_error("patience tracker updated after stopping");
    index_ = seen_++;
    if (index_ == 0 || value > best_value_ + 1e-9) {
        best_ = index_;
        best_value_ = value;
        since_best_ = 0;
        return false;
    }
    if (++since_best_ >= k_) triggered_ = true;
    return triggered_;
}

StopPoint early_stop(const std::vector<double>& series, std::size_t k) {
    if (series.empty()) throw UsageError("early stopping needs a non-empty series");
    PatienceTracker t(k);
    for (double v : series)
        if (t.update(v)) break;
    return t.point();
}

double metric_value(const toy::CheckpointMetrics& m, StopMetric metric) {
    switch (metric) {
        case StopMetric::hard_slice_accuracy: return m.hard_slice_accuracy;
        case StopMetric::id_accuracy: return m.id_accuracy;
        case StopMetric::mean_of_listed: return 0.5 * (m.id_accuracy + m.hard_slice_accuracy);
    }
    return 0.0;
}

std::vector<double> metric_series(const std::vector<toy::CheckpointMetrics>& ms, StopMetric metric) {
    std::vector<double> out;
    out.reserve(ms.size());
    for (const auto& m : ms) out.push_back(metric_value(m, metric));
    return out;
}

cost::RunCost full_run_cost(const ModelConfig& m, std::uint64_t num_params) {
    return {m.name, static_cast<double>(num_params), m.train.max_steps, m.train.batch_size};
}

namespace {

toy::RunResult train_main(const toy::SyntheticDataset& ds, const ModelConfig& main, const StopPolicy& stop,
                          std::optional<std::vector<toy::InstanceId>> subset) {
    toy::TrainConfig cfg = main.train;
    cfg.subset = std::move(subset);
    if (stop.kind == StopKind::none) return toy::train(ds, main.spec, cfg);
    PatienceTracker tracker(stop.k);
    return toy::train(ds, main.spec, cfg, [&](std::size_t, const toy::CheckpointMetrics& m) {
        return !tracker.update(metric_value(m, stop.metric));
    });
}

// Fills best/stop/charged and returns the cost of the main run as trained.
cost::RunCost settle_main(FtftReport& r, const ModelConfig& main) {
    const auto series = metric_series(r.main_run.metrics, r.stop.metric);
    if (r.stop.kind == StopKind::patience) {
        const StopPoint sp = early_stop(series, r.stop.k);
        r.best_checkpoint = sp.best;
        r.stop_checkpoint = sp.stop;
    } else {
        r.best_checkpoint = static_cast<std::size_t>(
            std::distance(series.begin(), std::max_element(series.begin(), series.end())));
        r.stop_checkpoint = series.size() - 1;
    }
    r.charged_checkpoints = r.stop_checkpoint + 1;
    const bool full = r.charged_checkpoints == r.main_run.checkpoints_planned;
    cost::RunCost rc = full_run_cost(main, r.main_run.dynamics.num_params);
    if (!full) rc.steps = r.charged_checkpoints * main.train.checkpoint_every;
    return rc;
}

const toy::RunResult& reference_for(const toy::SyntheticDataset& ds, const ModelConfig& ref,
                                    const toy::RunResult* given, std::optional<toy::RunResult>& slot) {
    slot = given ? *given : toy::run_reference(ds, ref.spec, ref.train);
    return *slot;
}

void check_reference_cheaper(FtftReport& r, const cost::RunCost& ref, const cost::RunCost& main) {
    const double a = ref.num_params * static_cast<double>(ref.steps) * static_cast<double>(ref.batch_size);
    const double b = main.num_params * static_cast<double>(main.steps) * static_cast<double>(main.batch_size);
    if (a >= b)
        r.warnings.push_back("reference model \"" + ref.model_name + "\" is not cheaper than main model \"" +
                             main.model_name + "\"");
}

}  // namespace

FtftReport run_erm(const toy::SyntheticDataset& ds, const ModelConfig& main, const StopPolicy& stop,
                   const cost::RunCost& baseline) {
    FtftReport r;
    r.method = stop.kind == StopKind::none ? "ERM" : "ERM(ES)";
    r.main_model = main.name;
    r.stop = stop;
    r.main_run = train_main(ds, main, stop, std::nullopt);
    r.costs = cost::total_cost({settle_main(r, main)}, baseline);
    return r;
}

FtftReport run_cartography(const toy::SyntheticDataset& ds, const ModelConfig& ref, const ModelConfig& main,
                           double q, cartography::SubsetKind kind, const cost::RunCost& baseline,
                           const toy::RunResult* reference) {
    cartography::check_q(q);
    FtftReport r;
    r.method = "DM-" + std::string(cartography::to_string(kind));
    r.main_model = main.name;
    r.ref_model = ref.name;
    r.subset_kind = kind;
    const auto& ref_run = reference_for(ds, ref, reference, r.reference_run);
    r.map = cartography::build_map(ref_run.dynamics, q);
    const auto subset = cartography::select_subset(*r.map, kind, main.train.seed);
    r.subset_size = subset.size();
    r.main_run = train_main(ds, main, r.stop, subset);
    const cost::RunCost ref_cost = full_run_cost(ref, ref_run.dynamics.num_params);
    r.costs = cost::total_cost({ref_cost, settle_main(r, main)}, baseline);
    return r;
}

FtftReport run_ftft(const toy::SyntheticDataset& ds, const ModelConfig& ref, const ModelConfig& main, double q,
                    const StopPolicy& stop, const cost::RunCost& baseline, const toy::RunResult* reference) {
    cartography::check_q(q);
    if (stop.kind != StopKind::patience) throw UsageError("FTFT needs a patience stop policy");
    FtftReport r;
    r.method = "FTFT";
    r.main_model = main.name;
    r.ref_model = ref.name;
    r.subset_kind = cartography::SubsetKind::ambiguous;
    r.stop = stop;
    const auto& ref_run = reference_for(ds, ref, reference, r.reference_run);
    r.map = cartography::build_map(ref_run.dynamics, q);
    r.subset_size = r.map->ambiguous.size();
    r.main_run = train_main(ds, main, stop, r.map->ambiguous);
    const cost::RunCost ref_cost = full_run_cost(ref, ref_run.dynamics.num_params);
    const cost::RunCost main_full = full_run_cost(main, r.main_run.dynamics.num_params);
    check_reference_cheaper(r, ref_cost, main_full);
    r.costs = cost::total_cost({ref_cost, settle_main(r, main)}, baseline);
    return r;
}

}  // namespace ftft::pipeline
