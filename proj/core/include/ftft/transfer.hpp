// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ftft/cartography.hpp"
#include "ftft/dynamics.hpp"
#include "ftft/format.hpp"

namespace ftft::transfer {

using cartography::DataMap;

inline constexpr double kDefaultSplit = 0.10;

struct OverlapMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;
};

struct TrajectorySummary {
    double split_fraction = kDefaultSplit;
    std::vector<double> hard_median;
    std::vector<double> other_median;
};

struct EasyRatioRow {
    std::string model;
    double q = 0.0;
    double easy_ratio = 0.0;
};

// Throws DataError ("instance sets differ", "q differs") for incompatible maps.
void check_compatible(const DataMap& a, const DataMap& b);

// |a.ambiguous ∩ b.ambiguous| / |a.ambiguous|
double ambiguous_overlap(const DataMap& a, const DataMap& b);

// Labels default to the maps' run ids.
OverlapMatrix overlap_matrix(const std::vector<DataMap>& maps, std::vector<std::string> labels = {});

double easy_ratio(const DataMap& map);

std::vector<EasyRatioRow> easy_ratio_table(const std::vector<dynamics::TrainingDynamics>& runs,
                                           const std::vector<double>& qs);

// Midpoint convention for even sizes.
double median(std::vector<double> xs);

TrajectorySummary median_trajectories(const dynamics::TrainingDynamics& d, double split_fraction = kDefaultSplit);

CsvTable overlap_csv(const OverlapMatrix& m);
CsvTable easy_ratio_csv(const std::vector<EasyRatioRow>& rows);
CsvTable trajectory_csv(const TrajectorySummary& t);
std::string overlap_svg(const OverlapMatrix& m);

}  // namespace ftft::transfer
