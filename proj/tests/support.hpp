// SPDX-License-Identifier: Apache-2.0
// Small builders shared by the unit tests.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "ftft/dynamics.hpp"
#include "ftft/rng.hpp"

namespace support {

// One record per series; ids are 0..n-1 unless given.
inline ftft::dynamics::TrainingDynamics make_dynamics(const std::vector<std::vector<double>>& series,
                                                      std::vector<ftft::dynamics::InstanceId> ids = {},
                                                      std::string run_id = "run") {
    ftft::dynamics::TrainingDynamics d;
    d.run_id = std::move(run_id);
    d.model_name = "model";
    d.num_params = 100;
    d.dataset_name = "data";
    d.num_checkpoints = series.empty() ? 2 : series.front().size();
    for (std::size_t i = 0; i < series.size(); ++i)
        d.records.push_back({ids.empty() ? i : ids[i], static_cast<int>(i % 2), series[i]});
    return d;
}

inline ftft::dynamics::TrainingDynamics random_dynamics(std::uint64_t seed, std::size_t n, std::size_t checkpoints) {
    ftft::Rng rng(seed);
    std::vector<std::vector<double>> series(n);
    std::vector<ftft::dynamics::InstanceId> ids;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back(5 * i + rng.below(5));
        for (std::size_t c = 0; c < checkpoints; ++c) series[i].push_back(rng.uniform());
    }
    return make_dynamics(series, ids, "random-" + std::to_string(seed));
}

inline std::string to_text(const ftft::dynamics::TrainingDynamics& d) {
    std::ostringstream out;
    ftft::dynamics::write_dynamics(d, out);
    return out.str();
}

inline ftft::dynamics::TrainingDynamics from_text(const std::string& text) {
    std::istringstream in(text);
    return ftft::dynamics::parse_dynamics(in);
}

}  // namespace support
