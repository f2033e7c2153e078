// SPDX-License-Identifier: Apache-2.0
#include "ftft/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "ftft/error.hpp"
#include "ftft/svg.hpp"

namespace ftft::transfer {

using cartography::InstanceId;

void check_compatible(const DataMap& a, const DataMap& b) {
    if (a.stats.size() != b.stats.size()) throw DataError("instance sets differ");
    for (std::size_t i = 0; i < a.stats.size(); ++i)
        if (a.stats[i].id != b.stats[i].id) throw DataError("instance sets differ");
    if (std::abs(a.q - b.q) > 1e-12) throw DataError("q differs between maps");
    if (a.ambiguous.size() != b.ambiguous.size()) throw DataError("ambiguous set sizes differ");
}

double ambiguous_overlap(const DataMap& a, const DataMap& b) {
    check_compatible(a, b);
    if (a.ambiguous.empty()) throw DataError("map has an empty ambiguous set");
    std::vector<InstanceId> both;
    std::set_intersection(a.ambiguous.begin(), a.ambiguous.end(), b.ambiguous.begin(), b.ambiguous.end(),
                          std::back_inserter(both));
    return static_cast<double>(both.size()) / static_cast<double>(a.ambiguous.size());
}

OverlapMatrix overlap_matrix(const std::vector<DataMap>& maps, std::vector<std::string> labels) {
    if (maps.size() < 2) throw UsageError("overlap matrix needs at least 2 maps");
    if (labels.empty())
        for (const auto& m : maps) labels.push_back(m.run_id);
    if (labels.size() != maps.size()) throw UsageError("one label per map expected");
    OverlapMatrix out;
    out.labels = std::move(labels);
    const std::size_t n = maps.size();
    out.values.assign(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) out.values[i][j] = ambiguous_overlap(maps[i], maps[j]);
    return out;
}

double easy_ratio(const DataMap& map) {
    if (map.stats.empty()) throw UsageError("easy ratio of an empty map");
    return static_cast<double>(map.easy.size()) / static_cast<double>(map.stats.size());
}

std::vector<EasyRatioRow> easy_ratio_table(const std::vector<dynamics::TrainingDynamics>& runs,
                                           const std::vector<double>& qs) {
    std::vector<EasyRatioRow> rows;
    for (const auto& d : runs) {
        const auto stats = cartography::compute_stats(d);
        for (double q : qs) rows.push_back({d.model_name, q, easy_ratio(cartography::categorize(stats, q))});
    }
    return rows;
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw UsageError("median of an empty set");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    const double hi = xs[mid];
    if (xs.size() % 2) return hi;
    const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

TrajectorySummary median_trajectories(const dynamics::TrainingDynamics& d, double split_fraction) {
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw UsageError("split fraction must be in (0, 1)");
    const auto stats = cartography::compute_stats(d);
    if (stats.size() < 2) throw UsageError("trajectory split needs at least 2 instances");
    const std::size_t k = std::min(cartography::sel_count(stats.size(), split_fraction), stats.size() - 1);
    auto hard_ids = cartography::rank_by(stats, cartography::Stat::mean, false, k);
    std::sort(hard_ids.begin(), hard_ids.end());

    TrajectorySummary t;
    t.split_fraction = split_fraction;
    std::vector<double> hard, other;
    for (std::size_t c = 0; c < d.num_checkpoints; ++c) {
        hard.clear();
        other.clear();
        for (const auto& r : d.records)
            (std::binary_search(hard_ids.begin(), hard_ids.end(), r.id) ? hard : other).push_back(r.p_true[c]);
        t.hard_median.push_back(median(hard));
        t.other_median.push_back(median(other));
    }
    return t;
}

CsvTable overlap_csv(const OverlapMatrix& m) {
    CsvTable t({"row", "col", "overlap"});
    for (std::size_t i = 0; i < m.values.size(); ++i)
        for (std::size_t j = 0; j < m.values.size(); ++j)
            t.add_row({m.labels[i], m.labels[j], format_exact(m.values[i][j])});
    return t;
}

CsvTable easy_ratio_csv(const std::vector<EasyRatioRow>& rows) {
    CsvTable t({"model", "q", "easy_ratio"});
    for (const auto& r : rows) t.add_row({r.model, format_exact(r.q), format_exact(r.easy_ratio)});
    return t;
}

CsvTable trajectory_csv(const TrajectorySummary& s) {
    CsvTable t({"checkpoint", "hard_median", "other_median"});
    for (std::size_t c = 0; c < s.hard_median.size(); ++c)
        t.add_row({std::to_string(c), format_exact(s.hard_median[c]), format_exact(s.other_median[c])});
    return t;
}

std::string overlap_svg(const OverlapMatrix& m) {
    return svg::heatmap("Ambiguous-set overlap", m.labels, m.values);
}

}  // namespace ftft::transfer
