// SPDX-License-Identifier: Apache-2.0
#include "ftft/cost.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json.hpp"

#include "ftft/error.hpp"

namespace ftft::cost {

namespace {

void check(const RunCost& r) {
    if (!(r.num_params > 0.0) || !std::isfinite(r.num_params) || r.steps == 0 || r.batch_size == 0)
        throw UsageError("run cost for \"" + r.model_name + "\" needs positive params, steps and batch size");
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

double relative_cost(const RunCost& run, const RunCost& baseline) {
    check(run);
    check(baseline);
    const double num = run.num_params * static_cast<double>(run.steps) * static_cast<double>(run.batch_size);
    const double den =
        baseline.num_params * static_cast<double>(baseline.steps) * static_cast<double>(baseline.batch_size);
    return 100.0 * num / den;
}

PipelineCost total_cost(std::vector<RunCost> components, const RunCost& baseline) {
    PipelineCost p;
    p.baseline = baseline;
    for (const auto& c : components) p.relative_total += relative_cost(c, baseline);
    p.components = std::move(components);
    return p;
}

PipelineCost pipeline_cost(const RunCost& reference, const RunCost& main, const RunCost& baseline) {
    return total_cost({reference, main}, baseline);
}

std::uint64_t charged_checkpoints(std::size_t best_index, std::size_t k, std::size_t total_checkpoints) {
    return std::min<std::uint64_t>(best_index + 1 + k, total_checkpoints);
}

std::string display(double percent) { return format_fixed(percent, 2); }

Registry Registry::builtin() {
    Registry r;
    r.add("deberta-v3-small", "DeBERTaV3-small", 44.00e6);
    r.add("deberta-v3-base", "DeBERTaV3-base", 86.00e6);
    r.add("deberta-v3-large", "DeBERTaV3-large", 304.00e6);
    r.add("electra-small", "ELECTRA-small", 14.00e6);
    r.add("electra-base", "ELECTRA-base", 110.00e6);
    r.add("electra-large", "ELECTRA-large", 335.00e6);
    r.add("bert-large", "BERT-large", 345.00e6);
    r.add("roberta-large", "RoBERTa-large", 355.00e6);
    r.add("tinybert", "TinyBERT", 4.40e6);
    return r;
}

void Registry::add(const std::string& name, std::string display_name, double num_params) {
    if (!(num_params > 0.0)) throw UsageError("registry entry \"" + name + "\" needs a positive parameter count");
    entries_[lower(name)] = Entry{std::move(display_name), num_params};
}

void Registry::merge_file(const std::string& path) {
    const auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError(path + ": registry must be a JSON object of name: params");
    for (const auto& [name, v] : j.items()) {
        if (!v.is_number()) throw DataError(path + ": parameter count for \"" + name + "\" must be a number");
        add(name, name, v.get<double>());
    }
}

bool Registry::contains(const std::string& name) const { return entries_.count(lower(name)) > 0; }

const Registry::Entry& Registry::at(const std::string& name) const {
    auto it = entries_.find(lower(name));
    if (it == entries_.end()) {
        std::string known;
        for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
        throw UsageError("unknown model \"" + name + "\"; registry entries: " + known);
    }
    return it->second;
}

std::vector<std::string> Registry::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) out.push_back(k);
    return out;
}

CsvTable cost_csv(const std::vector<CostRow>& rows) {
    CsvTable t({"method", "main_model", "ref_model", "relative_cost"});
    for (const auto& r : rows) t.add_row({r.method, r.main_model, r.ref_model, display(r.relative_cost)});
    return t;
}

}  // namespace ftft::cost
