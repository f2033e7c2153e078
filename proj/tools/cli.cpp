// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "ftft/cartography.hpp"
#include "ftft/cost.hpp"
#include "ftft/dynamics.hpp"
#include "ftft/error.hpp"
#include "ftft/format.hpp"
#include "ftft/pipeline.hpp"
#include "ftft/svg.hpp"
#include "ftft/toy.hpp"
#include "ftft/transfer.hpp"

namespace ftft::cli {

namespace fs = std::filesystem;

bool color_from_environment() {
    if (std::getenv("FTFT_NO_COLOR") != nullptr) return false;
    return ::isatty(STDOUT_FILENO) != 0;
}

namespace {

constexpr const char* kBold = "\033[1m";
constexpr const char* kRed = "\033[31m";
constexpr const char* kReset = "\033[0m";
constexpr const char* kIncomplete = "INCOMPLETE";

struct Io {
    std::ostream& out;
    std::ostream& err;
    bool color;

    std::string bold(const std::string& s) const { return color ? kBold + s + kReset : s; }
    void fail(const std::string& msg) const {
        err << (color ? std::string(kRed) + "error:" + kReset : std::string("error:")) << ' ' << msg << '\n';
    }
};

// Left-aligned text table; the header row is styled when color is on.
void print_table(const Io& io, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
    auto line = [&](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            s += cells[c];
            if (c + 1 < cells.size()) s += std::string(width[c] - cells[c].size() + 2, ' ');
        }
        return s;
    };
    io.out << io.bold(line(header)) << '\n';
    for (const auto& r : rows) io.out << line(r) << '\n';
}

void print_csv(const Io& io, const CsvTable& t, const std::vector<std::string>& header) {
    print_table(io, header, t.rows());
}

// Refuses to clobber existing files; creates the parent directory.
void prepare_file(const std::string& path, bool force) {
    const fs::path p(path);
    if (fs::exists(p) && !force) throw UsageError("refusing to overwrite " + path + " (pass --force)");
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Output directories may exist but must be empty unless forced.
void prepare_dir(const std::string& dir, bool force) {
    const fs::path p(dir);
    if (fs::exists(p)) {
        if (!fs::is_directory(p)) throw UsageError(dir + " exists and is not a directory");
        if (!fs::is_empty(p) && !force) throw UsageError("refusing to overwrite non-empty directory " + dir + " (pass --force)");
    }
    fs::create_directories(p);
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

pipeline::BenchmarkConfig load_config(const std::string& path, bool require_seeds) {
    if (path.empty()) return pipeline::default_benchmark_config();
    return pipeline::parse_benchmark_config(read_text_file(path), require_seeds);
}

std::optional<double> as_number(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

// ---- train ----

struct TrainArgs {
    std::string config;
    std::string model;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> dataset_seed;
    std::string subset_map;
    std::string subset_kind = "ambiguous";
    std::string out;
    bool force = false;
};

int cmd_train(const Io& io, const TrainArgs& a) {
    const auto cfg = load_config(a.config, false);
    const auto& mc = cfg.model(a.model.empty() ? cfg.main : a.model);
    const std::uint64_t ds_seed = a.dataset_seed ? *a.dataset_seed : cfg.dataset_seed.value_or(a.seed);
    const auto ds = toy::generate_dataset(ds_seed, cfg.num_instances, cfg.num_classes, cfg.mix, cfg.generator);

    toy::TrainConfig tc = mc.train;
    tc.seed = a.seed;
    if (!a.subset_map.empty()) {
        const auto map = cartography::read_map_file(a.subset_map);
        const auto kind = cartography::parse_subset_kind(a.subset_kind);
        tc.subset = cartography::select_subset(map, kind, a.seed);
    }

    const std::string dyn = join(a.out, mc.name + ".dyn.jsonl");
    const std::string met = join(a.out, mc.name + ".metrics.csv");
    const std::string data = join(a.out, "dataset.csv");
    // Runs sharing a dataset may share an output directory.
    const std::string data_text = toy::dataset_csv(ds).str();
    const bool same_data = fs::exists(data) && read_text_file(data) == data_text;
    for (const auto* p : {&dyn, &met}) prepare_file(*p, a.force);
    if (!same_data) prepare_file(data, a.force);

    const auto run = toy::train(ds, mc.spec, tc);
    if (!same_data) write_text_file(data, data_text);
    dynamics::write_dynamics_file(run.dynamics, dyn);
    toy::metrics_csv(run.metrics).save(met);

    const auto& last = run.metrics.back();
    print_table(io, {"model", "num_params", "steps", "checkpoints", "id_accuracy", "hard_slice_accuracy", "digest"},
                {{mc.name, std::to_string(run.dynamics.num_params), std::to_string(run.steps_trained),
                  std::to_string(run.dynamics.num_checkpoints), format_exact(last.id_accuracy),
                  format_exact(last.hard_slice_accuracy), run.final_params_digest}});
    io.out << "wrote " << dyn << ", " << met << ", " << data << '\n';
    return kOk;
}

// ---- map ----

int cmd_map(const Io& io, const std::string& dynamics_path, double q, const std::string& out, bool force) {
    cartography::check_q(q);
    const auto d = dynamics::read_dynamics_file(dynamics_path);
    prepare_file(out, force);
    const auto map = cartography::build_map(d, q);
    cartography::write_map_file(map, out);
    print_table(io, {"instances", "q", "ambiguous", "hard_to_learn", "easy", "easy_ratio"},
                {{std::to_string(map.size()), format_exact(map.q), std::to_string(map.ambiguous.size()),
                  std::to_string(map.hard_to_learn.size()), std::to_string(map.easy.size()),
                  format_exact(transfer::easy_ratio(map))}});
    io.out << "wrote " << out << '\n';
    return kOk;
}

// ---- select ----

int cmd_select(const Io& io, const std::string& map_path, const std::string& kind_name,
               std::optional<std::uint64_t> seed, const std::string& out, bool force) {
    const auto kind = cartography::parse_subset_kind(kind_name);
    if (kind == cartography::SubsetKind::random && !seed) throw UsageError("random selection needs --seed");
    const auto map = cartography::read_map_file(map_path);
    const auto ids = cartography::select_subset(map, kind, seed);
    std::string text;
    for (auto id : ids) text += std::to_string(id) + '\n';
    if (out.empty()) {
        io.out << text;
    } else {
        prepare_file(out, force);
        write_text_file(out, text);
        io.out << "selected " << ids.size() << ' ' << to_string(kind) << " ids, wrote " << out << '\n';
    }
    return kOk;
}

// ---- compare ----

int cmd_compare(const Io& io, const std::vector<std::string>& paths, std::vector<std::string> labels,
                const std::string& out, bool force) {
    if (paths.size() < 2) throw UsageError("compare needs at least two maps");
    if (!labels.empty() && labels.size() != paths.size()) throw UsageError("--labels needs one label per map");
    std::vector<cartography::DataMap> maps;
    for (const auto& p : paths) maps.push_back(cartography::read_map_file(p));
    if (labels.empty())
        for (std::size_t i = 0; i < maps.size(); ++i)
            labels.push_back(maps[i].run_id.empty() ? fs::path(paths[i]).filename().string() : maps[i].run_id);
    const auto m = transfer::overlap_matrix(maps, labels);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        std::vector<std::string> r{m.labels[i]};
        for (double v : m.values[i]) r.push_back(format_fixed(v, 2));
        rows.push_back(std::move(r));
    }
    std::vector<std::string> header{""};
    header.insert(header.end(), m.labels.begin(), m.labels.end());
    print_table(io, header, rows);

    if (!out.empty()) {
        const std::string csv = join(out, "overlap.csv");
        const std::string svg = join(out, "overlap.svg");
        prepare_file(csv, force);
        prepare_file(svg, force);
        transfer::overlap_csv(m).save(csv);
        write_text_file(svg, transfer::overlap_svg(m));
        io.out << "wrote " << csv << ", " << svg << '\n';
    }
    return kOk;
}

// ---- trajectory ----

int cmd_trajectory(const Io& io, const std::string& dynamics_path, double split, const std::string& out, bool force) {
    const auto d = dynamics::read_dynamics_file(dynamics_path);
    const auto t = transfer::median_trajectories(d, split);
    const auto csv = transfer::trajectory_csv(t);
    print_csv(io, csv, {"checkpoint", "hard_median", "other_median"});
    if (!out.empty()) {
        const std::string csv_path = join(out, "trajectory.csv");
        const std::string svg_path = join(out, "trajectory.svg");
        prepare_file(csv_path, force);
        prepare_file(svg_path, force);
        csv.save(csv_path);
        std::vector<double> x;
        for (std::size_t i = 0; i < t.hard_median.size(); ++i) x.push_back(static_cast<double>(i));
        write_text_file(svg_path, svg::line_chart("median p_true: " + d.model_name, x,
                                                  {{"hard-to-learn", t.hard_median}, {"other", t.other_median}},
                                                  "checkpoint", "median p_true"));
        io.out << "wrote " << csv_path << ", " << svg_path << '\n';
    }
    return kOk;
}

// ---- easy-ratio ----

int cmd_easy_ratio(const Io& io, const std::vector<std::string>& paths, const std::vector<double>& qs,
                   const std::string& out, bool force) {
    if (paths.empty()) throw UsageError("easy-ratio needs at least one dynamics file");
    for (double q : qs) cartography::check_q(q);
    std::vector<dynamics::TrainingDynamics> runs;
    for (const auto& p : paths) runs.push_back(dynamics::read_dynamics_file(p));
    const auto csv = transfer::easy_ratio_csv(transfer::easy_ratio_table(runs, qs));
    print_csv(io, csv, {"model", "q", "easy_ratio"});
    if (!out.empty()) {
        prepare_file(out, force);
        csv.save(out);
        io.out << "wrote " << out << '\n';
    }
    return kOk;
}

// ---- cost ----

struct CostArgs {
    std::vector<std::string> models;
    std::string baseline = "deberta-v3-large";
    std::uint64_t steps = 1;
    std::optional<std::uint64_t> baseline_steps;
    std::uint64_t batch_size = 1;
    std::optional<std::uint64_t> baseline_batch_size;
    std::string registry;
    bool total = false;
};

cost::RunCost resolve(const cost::Registry& reg, const std::string& token, std::uint64_t steps, std::uint64_t batch) {
    if (auto v = as_number(token)) {
        if (!(*v > 0.0)) throw UsageError("parameter count must be positive: " + token);
        return {token, *v, steps, batch};
    }
    const auto& e = reg.at(token);
    return {e.display_name, e.num_params, steps, batch};
}

int cmd_cost(const Io& io, const CostArgs& a) {
    auto reg = cost::Registry::builtin();
    if (!a.registry.empty()) reg.merge_file(a.registry);
    std::vector<cost::RunCost> runs;
    for (const auto& m : a.models) runs.push_back(resolve(reg, m, a.steps, a.batch_size));
    const auto base = resolve(reg, a.baseline, a.baseline_steps.value_or(a.steps),
                              a.baseline_batch_size.value_or(a.batch_size));
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : runs) rows.push_back({r.model_name, cost::display(cost::relative_cost(r, base))});
    if (a.total) rows.push_back({"total", cost::display(cost::total_cost(runs, base).relative_total)});
    print_table(io, {"model", "relative_cost"}, rows);
    return kOk;
}

// ---- ftft ----

int cmd_ftft(const Io& io, const std::string& config_path, const std::string& out, bool force) {
    const auto cfg = load_config(config_path, true);
    prepare_dir(out, force);
    const std::string marker = join(out, kIncomplete);
    write_text_file(marker, "benchmark running\n");
    try {
        const auto result = pipeline::run_benchmark(cfg);
        pipeline::write_bundle(result, out);
        fs::remove(marker);
        const auto summary = pipeline::summary_csv(result);
        print_csv(io, summary,
                  {"seed", "method", "subset_size", "best_checkpoint", "stop_checkpoint", "charged_checkpoints",
                   "best_hard_slice_accuracy", "final_hard_slice_accuracy", "relative_cost"});
        for (const auto& s : result.seeds)
            for (const auto& r : s.reports)
                for (const auto& w : r.warnings) io.err << "warning: seed " << s.seed << ' ' << r.method << ": " << w << '\n';
        io.out << "wrote bundle " << out << '\n';
    } catch (const std::exception& e) {
        // Anything already written stays, labeled by the marker.
        write_text_file(marker, std::string("benchmark failed: ") + e.what() + '\n');
        throw;
    }
    return kOk;
}

// ---- report ----

int cmd_report(const Io& io, const std::string& bundle) {
    if (fs::exists(join(bundle, kIncomplete))) throw DataError("bundle " + bundle + " is incomplete");
    const std::string path = join(bundle, "summary.csv");
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty summary");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
    }
    auto col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError(path + ": missing column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_method = col("method"), c_best = col("best_hard_slice_accuracy"),
                      c_final = col("final_hard_slice_accuracy"), c_charged = col("charged_checkpoints"),
                      c_cost = col("relative_cost");

    struct Acc {
        std::size_t n = 0;
        double best = 0, final = 0, charged = 0, cost = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Acc> acc;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() != header.size()) throw ParseError(line_no, "wrong number of fields");
        auto num = [&](std::size_t c) {
            auto v = as_number(cells[c]);
            if (!v) throw ParseError(line_no, "not a number: " + cells[c]);
            return *v;
        };
        const auto& m = cells[c_method];
        if (!acc.count(m)) order.push_back(m);
        auto& a = acc[m];
        ++a.n;
        a.best += num(c_best);
        a.final += num(c_final);
        a.charged += num(c_charged);
        a.cost += num(c_cost);
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& m : order) {
        const auto& a = acc[m];
        const double n = static_cast<double>(a.n);
        rows.push_back({m, std::to_string(a.n), format_fixed(a.best / n, 4), format_fixed(a.final / n, 4),
                        format_fixed(a.charged / n, 2), cost::display(a.cost / n)});
    }
    print_table(io, {"method", "seeds", "mean_best_hard_slice", "mean_final_hard_slice", "mean_charged_checkpoints",
                     "mean_relative_cost"},
                rows);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Options& options) {
    const Io io{out, err, options.color};
    CLI::App app{"Dataset cartography and fine-tuning pipelines on data maps", "ftft"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    TrainArgs train;
    auto* sc_train = app.add_subcommand("train", "Train a toy model on a synthetic dataset and record its dynamics");
    sc_train->add_option("--config", train.config, "Benchmark config supplying dataset and model settings");
    sc_train->add_option("--model", train.model, "Model config name (default: the config's main model)");
    sc_train->add_option("--seed", train.seed, "Training seed");
    sc_train->add_option("--dataset-seed", train.dataset_seed, "Dataset seed (default: config value or --seed)");
    sc_train->add_option("--subset-map", train.subset_map, "Train only on a subset selected from this map");
    sc_train->add_option("--subset-kind", train.subset_kind, "ambiguous, hard_to_learn, easy or random");
    sc_train->add_option("--out", train.out, "Output directory")->required();
    sc_train->add_flag("--force", train.force, "Overwrite existing outputs");

    std::string dyn_path, out_path, map_path, kind = "ambiguous";
    double q = cartography::kDefaultQ, split = transfer::kDefaultSplit;
    bool force = false;
    std::optional<std::uint64_t> seed;

    auto* sc_map = app.add_subcommand("map", "Build a data map from a dynamics file");
    sc_map->add_option("--dynamics", dyn_path, "ftft-dyn-1 file")->required();
    sc_map->add_option("--q", q, "Selection fraction in (0, 0.5]");
    sc_map->add_option("--out", out_path, "Map file to write")->required();
    sc_map->add_flag("--force", force, "Overwrite an existing map");

    auto* sc_select = app.add_subcommand("select", "List the ids of a map subset");
    sc_select->add_option("--map", map_path, "ftft-map-1 file")->required();
    sc_select->add_option("--kind", kind, "ambiguous, hard_to_learn, easy or random");
    sc_select->add_option("--seed", seed, "Seed for random selection");
    sc_select->add_option("--out", out_path, "Id file to write (default: stdout)");
    sc_select->add_flag("--force", force, "Overwrite an existing id file");

    std::vector<std::string> paths, labels;
    auto* sc_compare = app.add_subcommand("compare", "Ambiguous-set overlap between data maps");
    sc_compare->add_option("maps", paths, "Map files")->required();
    sc_compare->add_option("--labels", labels, "Row and column labels, one per map");
    sc_compare->add_option("--out", out_path, "Directory for overlap.csv and overlap.svg");
    sc_compare->add_flag("--force", force, "Overwrite existing outputs");

    auto* sc_traj = app.add_subcommand("trajectory", "Median p_true of hard-to-learn vs other instances per checkpoint");
    sc_traj->add_option("--dynamics", dyn_path, "ftft-dyn-1 file")->required();
    sc_traj->add_option("--split", split, "Fraction of instances counted as hard-to-learn");
    sc_traj->add_option("--out", out_path, "Directory for trajectory.csv and trajectory.svg");
    sc_traj->add_flag("--force", force, "Overwrite existing outputs");

    std::vector<double> qs = {0.10, 0.25, 0.33, 0.50};
    auto* sc_easy = app.add_subcommand("easy-ratio", "Share of easy instances outside the ambiguous and hard sets");
    sc_easy->add_option("dynamics", paths, "ftft-dyn-1 files")->required();
    sc_easy->add_option("--q", qs, "Selection fractions");
    sc_easy->add_option("--out", out_path, "CSV file to write");
    sc_easy->add_flag("--force", force, "Overwrite an existing CSV");

    CostArgs cost_args;
    auto* sc_cost = app.add_subcommand("cost", "Training cost relative to a baseline run, in percent");
    sc_cost->add_option("models", cost_args.models, "Registry names or parameter counts")->required();
    sc_cost->add_option("--baseline", cost_args.baseline, "Baseline registry name or parameter count");
    sc_cost->add_option("--steps", cost_args.steps, "Training steps of each model");
    sc_cost->add_option("--baseline-steps", cost_args.baseline_steps, "Training steps of the baseline");
    sc_cost->add_option("--batch-size", cost_args.batch_size, "Batch size of each model");
    sc_cost->add_option("--baseline-batch-size", cost_args.baseline_batch_size, "Batch size of the baseline");
    sc_cost->add_option("--registry", cost_args.registry, "JSON file of extra or replacement parameter counts");
    sc_cost->add_flag("--total", cost_args.total, "Also print the summed pipeline cost");

    std::string config_path;
    auto* sc_ftft = app.add_subcommand("ftft", "Run the ERM, data-map and FTFT benchmark and write a report bundle");
    sc_ftft->add_option("--config", config_path, "Benchmark config")->required();
    sc_ftft->add_option("--out", out_path, "Bundle directory")->required();
    sc_ftft->add_flag("--force", force, "Write into a non-empty directory");

    std::string bundle;
    auto* sc_report = app.add_subcommand("report", "Summarize a report bundle per method");
    sc_report->add_option("--bundle", bundle, "Bundle directory written by ftft")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (sc_train->parsed()) return cmd_train(io, train);
        if (sc_map->parsed()) return cmd_map(io, dyn_path, q, out_path, force);
        if (sc_select->parsed()) return cmd_select(io, map_path, kind, seed, out_path, force);
        if (sc_compare->parsed()) return cmd_compare(io, paths, labels, out_path, force);
        if (sc_traj->parsed()) return cmd_trajectory(io, dyn_path, split, out_path, force);
        if (sc_easy->parsed()) return cmd_easy_ratio(io, paths, qs, out_path, force);
        if (sc_cost->parsed()) return cmd_cost(io, cost_args);
        if (sc_ftft->parsed()) return cmd_ftft(io, config_path, out_path, force);
        if (sc_report->parsed()) return cmd_report(io, bundle);
    } catch (const UsageError& e) {
        io.fail(e.what());
        return kUsageError;
    } catch (const std::exception& e) {
        io.fail(e.what());
        return kDataError;
    }
    return kUsageError;
}

}  // namespace ftft::cli
