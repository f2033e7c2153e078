// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ftft/format.hpp"

namespace ftft::cost {

struct RunCost {
    std::string model_name;
    double num_params = 0.0;
    std::uint64_t steps = 1;
    std::uint64_t batch_size = 1;
};

struct PipelineCost {
    std::vector<RunCost> components;
    RunCost baseline;
    double relative_total = 0.0;  // percent of baseline
};

// 100 * (P*S*B) / (P0*S0*B0), full precision.
double relative_cost(const RunCost& run, const RunCost& baseline);

PipelineCost pipeline_cost(const RunCost& reference, const RunCost& main, const RunCost& baseline);
PipelineCost total_cost(std::vector<RunCost> components, const RunCost& baseline);

// Main-run steps charged after early stopping: the best checkpoint, the k
// checkpoints trained past it, capped at the full run.
std::uint64_t charged_checkpoints(std::size_t best_index, std::size_t k, std::size_t total_checkpoints);

std::string display(double percent);  // 2 decimals

// Parameter counts of known models, keyed by lower-case name.
class Registry {
public:
    struct Entry {
        std::string display_name;
        double num_params;
    };

    static Registry builtin();
    // JSON object {"name": params, ...}; entries replace or extend the current ones.
    void merge_file(const std::string& path);
    void add(const std::string& name, std::string display_name, double num_params);

    bool contains(const std::string& name) const;
    const Entry& at(const std::string& name) const;  // UsageError listing names when unknown
    std::vector<std::string> names() const;

private:
    std::map<std::string, Entry> entries_;
};

struct CostRow {
    std::string method;
    std::string main_model;
    std::string ref_model;
    double relative_cost = 0.0;
};

CsvTable cost_csv(const std::vector<CostRow>& rows);

}  // namespace ftft::cost
