// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <cctype>
#include <future>

#include "json.hpp"

#include "ftft/error.hpp"
#include "ftft/pipeline.hpp"
#include "ftft/svg.hpp"

namespace ftft::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

const ModelConfig& BenchmarkConfig::model(const std::string& name) const {
    auto it = models.find(name);
    if (it == models.end()) throw UsageError("config names unknown model \"" + name + "\"");
    return it->second;
}

namespace {

void read_train(const json& j, toy::TrainConfig& t) {
    t.max_steps = j.value("max_steps", t.max_steps);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.peak_lr = j.value("peak_lr", t.peak_lr);
    t.warmup_fraction = j.value("warmup_fraction", t.warmup_fraction);
    t.checkpoint_every = j.value("checkpoint_every", t.checkpoint_every);
    t.weight_decay = j.value("weight_decay", t.weight_decay);
}

BenchmarkConfig from_json(const json& j, bool require_seeds) {
    BenchmarkConfig c;
    const bool has_seeds = j.contains("seeds") && j["seeds"].is_array() && !j["seeds"].empty();
    if (has_seeds)
        c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    else if (require_seeds)
        throw UsageError("seeds required");

    const json ds = j.value("dataset", json::object());
    if (ds.contains("seed") && !ds["seed"].is_null()) c.dataset_seed = ds["seed"].get<std::uint64_t>();
    c.num_instances = ds.value("num_instances", c.num_instances);
    c.num_classes = ds.value("num_classes", c.num_classes);
    if (ds.contains("mix")) {
        const json& m = ds["mix"];
        c.mix = {m.at("simple").get<double>(), m.at("ambiguous_band").get<double>(), m.at("difficult").get<double>()};
    }
    if (ds.contains("generator")) {
        const json& g = ds["generator"];
        auto& p = c.generator;
        p.simple_radius = g.value("simple_radius", p.simple_radius);
        p.simple_noise = g.value("simple_noise", p.simple_noise);
        p.simple_conflict = g.value("simple_conflict", p.simple_conflict);
        p.band_cue = g.value("band_cue", p.band_cue);
        p.band_cue_floor = g.value("band_cue_floor", p.band_cue_floor);
        p.band_noise = g.value("band_noise", p.band_noise);
        p.cell_margin = g.value("cell_margin", p.cell_margin);
        p.grid_cells = g.value("grid_cells", p.grid_cells);
        p.train_fraction = g.value("train_fraction", p.train_fraction);
        p.hard_slice_fraction = g.value("hard_slice_fraction", p.hard_slice_fraction);
    }

    toy::TrainConfig shared;
    if (j.contains("train")) read_train(j["train"], shared);
    if (!j.contains("models") || !j["models"].is_object() || j["models"].empty()) throw UsageError("models required");
    for (const auto& [name, m] : j["models"].items()) {
        ModelConfig mc;
        mc.name = name;
        mc.spec.kind = toy::parse_model_kind(m.at("kind").get<std::string>());
        mc.spec.hidden_units = m.value("hidden_units", mc.spec.hidden_units);
        mc.spec.init_scale = m.value("init_scale", mc.spec.init_scale);
        mc.train = shared;
        read_train(m, mc.train);
        toy::validate(mc.train);
        c.models.emplace(name, std::move(mc));
    }
    c.reference = j.value("reference", c.reference);
    c.main = j.value("main", c.main);
    c.baseline = j.value("baseline", c.main);
    for (const auto* name : {&c.reference, &c.main, &c.baseline}) c.model(*name);

    c.q = j.value("q", c.q);
    cartography::check_q(c.q);
    if (j.contains("subset_kinds")) {
        c.subset_kinds.clear();
        for (const auto& k : j["subset_kinds"]) c.subset_kinds.push_back(cartography::parse_subset_kind(k.get<std::string>()));
    }
    if (j.contains("stop")) {
        const json& s = j["stop"];
        const std::string kind = s.value("kind", std::string("patience"));
        if (kind != "patience") throw UsageError("benchmark stop policy must be patience");
        c.stop.k = s.value("k", c.stop.k);
        if (c.stop.k < 1) throw UsageError("patience k must be at least 1");
        c.stop.metric = parse_stop_metric(s.value("metric", std::string("hard_slice_accuracy")));
    }
    if (j.contains("easy_ratio_qs")) c.easy_ratio_qs = j["easy_ratio_qs"].get<std::vector<double>>();
    for (double q : c.easy_ratio_qs) cartography::check_q(q);
    c.trajectory_split = j.value("trajectory_split", c.trajectory_split);
    return c;
}

std::string fmt_metric(double v) { return format_exact(v); }

}  // namespace

BenchmarkConfig parse_benchmark_config(const std::string& json_text, bool require_seeds) {
    const json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw UsageError("benchmark config is not a JSON object");
    try {
        return from_json(j, require_seeds);
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid benchmark config: ") + e.what());
    }
}

BenchmarkConfig default_benchmark_config() {
    BenchmarkConfig c;
    c.seeds = {0, 1, 2, 3, 4};
    toy::TrainConfig t;
    t.max_steps = 3000;
    t.checkpoint_every = 150;
    ModelConfig lin{"linear", {toy::ModelKind::linear, 0, 1.0}, t};
    lin.train.peak_lr = 0.2;
    ModelConfig mlp{"mlp", {toy::ModelKind::mlp, 32, 1.0}, t};
    mlp.train.peak_lr = 0.5;
    c.models = {{"linear", lin}, {"mlp", mlp}};
    return c;
}

const FtftReport& SeedOutcome::report(const std::string& method) const {
    for (const auto& r : reports)
        if (r.method == method) return r;
    throw UsageError("no report for method \"" + method + "\"");
}

SeedOutcome run_seed(const BenchmarkConfig& config, std::uint64_t seed) {
    const auto ds = toy::generate_dataset(config.dataset_seed.value_or(seed), config.num_instances,
                                          config.num_classes, config.mix, config.generator);
    auto seeded = [seed](ModelConfig m) {
        m.train.seed = seed;
        return m;
    };

    SeedOutcome out;
    out.seed = seed;
    std::vector<dynamics::TrainingDynamics> dyn;
    for (const auto& [name, m] : config.models) {
        ReferenceOutcome ro;
        ro.run = toy::run_reference(ds, m.spec, seeded(m).train);
        ro.run.dynamics.model_name = name;
        ro.map = cartography::build_map(ro.run.dynamics, config.q);
        ro.trajectory = transfer::median_trajectories(ro.run.dynamics, config.trajectory_split);
        dyn.push_back(ro.run.dynamics);
        out.references.emplace(name, std::move(ro));
    }
    out.easy_ratios = transfer::easy_ratio_table(dyn, config.easy_ratio_qs);

    const ModelConfig ref = seeded(config.model(config.reference));
    const ModelConfig main = seeded(config.model(config.main));
    const ModelConfig base = seeded(config.model(config.baseline));
    const cost::RunCost baseline =
        full_run_cost(base, base.spec.num_params(ds.dim(), ds.num_classes));
    const toy::RunResult& ref_run = out.references.at(config.reference).run;

    out.reports.push_back(run_erm(ds, main, StopPolicy{}, baseline));
    out.reports.push_back(run_erm(ds, main, config.stop, baseline));
    for (auto kind : config.subset_kinds)
        out.reports.push_back(run_cartography(ds, ref, main, config.q, kind, baseline, &ref_run));
    out.reports.push_back(run_ftft(ds, ref, main, config.q, config.stop, baseline, &ref_run));
    return out;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
    if (config.seeds.empty()) throw UsageError("seeds required");
    BenchmarkResult result;
    result.config = config;
    // Seeds are independent; results are collected in seed-list order.
    std::vector<std::future<SeedOutcome>> jobs;
    for (auto s : config.seeds) jobs.push_back(std::async(std::launch::async, run_seed, std::cref(config), s));
    for (auto& j : jobs) result.seeds.push_back(j.get());
    return result;
}

std::string method_slug(const std::string& method) {
    std::string out;
    for (char c : method) {
        if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(c));
        else if (!out.empty() && out.back() != '_') out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

CsvTable summary_csv(const BenchmarkResult& result) {
    CsvTable t({"seed", "method", "subset_size", "best_checkpoint", "stop_checkpoint", "charged_checkpoints",
                "best_hard_slice_accuracy", "final_hard_slice_accuracy", "relative_cost"});
    for (const auto& s : result.seeds)
        for (const auto& r : s.reports) {
            const auto& m = r.metric_curves();
            t.add_row({std::to_string(s.seed), r.method, std::to_string(r.subset_size),
                       std::to_string(r.best_checkpoint), std::to_string(r.stop_checkpoint),
                       std::to_string(r.charged_checkpoints), fmt_metric(m[r.best_checkpoint].hard_slice_accuracy),
                       fmt_metric(m.back().hard_slice_accuracy), cost::display(r.costs.relative_total)});
        }
    return t;
}

void write_bundle(const BenchmarkResult& result, const std::string& dir) {
    fs::create_directories(dir);
    summary_csv(result).save((fs::path(dir) / "summary.csv").string());
    for (const auto& s : result.seeds) {
        const fs::path sd = fs::path(dir) / ("seed_" + std::to_string(s.seed));
        fs::create_directories(sd);
        for (const auto& [name, ro] : s.references) {
            const std::string stem = "reference_" + name;
            dynamics::write_dynamics_file(ro.run.dynamics, (sd / (stem + ".dyn.jsonl")).string());
            cartography::write_map_file(ro.map, (sd / (stem + ".map.json")).string());
            toy::metrics_csv(ro.run.metrics).save((sd / (stem + ".metrics.csv")).string());
            transfer::trajectory_csv(ro.trajectory).save((sd / (stem + ".trajectory.csv")).string());
        }
        transfer::easy_ratio_csv(s.easy_ratios).save((sd / "easy_ratio.csv").string());

        std::vector<cost::CostRow> costs;
        std::vector<svg::Series> curves;
        std::size_t longest = 0;
        for (const auto& r : s.reports) {
            const std::string stem = method_slug(r.method);
            dynamics::write_dynamics_file(r.main_run.dynamics, (sd / (stem + ".dyn.jsonl")).string());
            toy::metrics_csv(r.main_run.metrics).save((sd / (stem + ".metrics.csv")).string());
            costs.push_back({r.method, r.main_model, r.ref_model.empty() ? "-" : r.ref_model, r.costs.relative_total});
            svg::Series ser{r.method, metric_series(r.metric_curves(), StopMetric::hard_slice_accuracy)};
            longest = std::max(longest, ser.y.size());
            curves.push_back(std::move(ser));
        }
        cost::cost_csv(costs).save((sd / "cost.csv").string());
        std::vector<double> x;
        const auto every = result.config.model(result.config.main).train.checkpoint_every;
        for (std::size_t i = 0; i < longest; ++i) x.push_back(static_cast<double>((i + 1) * every));
        write_text_file((sd / "curves.svg").string(),
                        svg::line_chart("Hard-slice accuracy, seed " + std::to_string(s.seed), x, curves,
                                        "training step", "hard_slice_accuracy"));
    }
}

}  // namespace ftft::pipeline
