// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ftft/dynamics.hpp"

namespace ftft::cartography {

using dynamics::InstanceId;

inline constexpr double kDefaultQ = 0.33;
inline constexpr std::string_view kMapSchema = "ftft-map-1";

struct InstanceStats {
    InstanceId id = 0;
    double mean = 0.0;
    double std = 0.0;  // population std over checkpoints

    bool operator==(const InstanceStats&) const = default;
};

// Stats are kept sorted by id; the three id lists are sorted ascending.
struct DataMap {
    std::string run_id;
    double q = kDefaultQ;
    std::vector<InstanceStats> stats;
    std::vector<InstanceId> ambiguous;
    std::vector<InstanceId> hard_to_learn;
    std::vector<InstanceId> easy;

    std::size_t size() const { return stats.size(); }
    bool operator==(const DataMap&) const = default;
};

enum class SubsetKind { ambiguous, hard_to_learn, easy, random };

SubsetKind parse_subset_kind(std::string_view name);
std::string_view to_string(SubsetKind kind);

// Throws UsageError "q must be in (0, 0.5]".
void check_q(double q);

// max(1, floor(q*n + 0.5))
std::size_t sel_count(std::size_t n, double q);

// Values closer than 1e-12 share a tie key; ordering then falls back to id.
std::int64_t tie_key(double v);

// Ids of the k instances with the smallest (or largest) value of the chosen
// statistic, ties broken by ascending id. Result is in rank order.
enum class Stat { mean, std };
std::vector<InstanceId> rank_by(const std::vector<InstanceStats>& stats, Stat stat, bool largest_first,
                                std::size_t k);

std::vector<InstanceStats> compute_stats(const dynamics::TrainingDynamics& d);
void compute_mean_std(const std::vector<double>& xs, double& mean, double& std);

DataMap categorize(std::vector<InstanceStats> stats, double q = kDefaultQ, std::string run_id = {});
DataMap build_map(const dynamics::TrainingDynamics& d, double q = kDefaultQ);

// kind=random needs a seed and draws sel_count(N, q) ids without replacement.
std::vector<InstanceId> select_subset(const DataMap& map, SubsetKind kind,
                                      std::optional<std::uint64_t> seed = std::nullopt);

std::string map_to_json(const DataMap& map);
DataMap map_from_json(const std::string& text);
DataMap read_map_file(const std::string& path);
void write_map_file(const DataMap& map, const std::string& path);

}  // namespace ftft::cartography
