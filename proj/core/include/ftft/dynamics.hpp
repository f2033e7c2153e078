// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ftft::dynamics {

inline constexpr std::string_view kSchemaVersion = "ftft-dyn-1";

using InstanceId = std::uint64_t;

struct Record {
    InstanceId id = 0;
    int gold = 0;
    std::vector<double> p_true;

    bool operator==(const Record&) const = default;
};

// True-class probabilities of every training instance across the checkpoints
// of one run.
struct TrainingDynamics {
    std::string run_id;
    std::string model_name;
    std::uint64_t num_params = 1;
    std::string dataset_name;
    std::size_t num_checkpoints = 2;
    std::vector<Record> records;

    bool operator==(const TrainingDynamics&) const = default;
};

// Throws ftft::DataError naming the first violated invariant.
void validate(const TrainingDynamics& d);

// Reads the line-delimited format. Errors are ftft::ParseError with the
// 1-based line number of the offending line.
TrainingDynamics parse_dynamics(std::istream& in);
TrainingDynamics read_dynamics_file(const std::string& path);

void write_dynamics(const TrainingDynamics& d, std::ostream& out);
void write_dynamics_file(const TrainingDynamics& d, const std::string& path);

}  // namespace ftft::dynamics
