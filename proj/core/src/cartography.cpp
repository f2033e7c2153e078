// SPDX-License-Identifier: Apache-2.0
#include "ftft/cartography.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "ftft/error.hpp"
#include "ftft/format.hpp"
#include "ftft/rng.hpp"

namespace ftft::cartography {

using nlohmann::json;

namespace {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

std::vector<InstanceId> sorted(std::vector<InstanceId> ids) {
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

SubsetKind parse_subset_kind(std::string_view name) {
    if (name == "ambiguous") return SubsetKind::ambiguous;
    if (name == "hard_to_learn") return SubsetKind::hard_to_learn;
    if (name == "easy") return SubsetKind::easy;
    if (name == "random") return SubsetKind::random;
    throw UsageError("unknown subset kind \"" + std::string(name) +
                     "\" (expected ambiguous, hard_to_learn, easy or random)");
}

std::string_view to_string(SubsetKind kind) {
    switch (kind) {
        case SubsetKind::ambiguous: return "ambiguous";
        case SubsetKind::hard_to_learn: return "hard_to_learn";
        case SubsetKind::easy: return "easy";
        case SubsetKind::random: return "random";
    }
    return "?";
}

void check_q(double q) {
    if (!(q > 0.0 && q <= 0.5)) throw UsageError("q must be in (0, 0.5]");
}

std::size_t sel_count(std::size_t n, double q) {
    const double c = std::floor(q * static_cast<double>(n) + 0.5);
    return std::max<std::size_t>(1, static_cast<std::size_t>(c));
}

std::int64_t tie_key(double v) { return std::llround(v * 1e12); }

std::vector<InstanceId> rank_by(const std::vector<InstanceStats>& stats, Stat stat, bool largest_first,
                                std::size_t k) {
    struct Key {
        std::int64_t value;
        InstanceId id;
    };
    std::vector<Key> keys;
    keys.reserve(stats.size());
    for (const auto& s : stats) {
        const std::int64_t v = tie_key(stat == Stat::mean ? s.mean : s.std);
        keys.push_back({largest_first ? -v : v, s.id});
    }
    k = std::min(k, keys.size());
    auto less = [](const Key& a, const Key& b) { return a.value != b.value ? a.value < b.value : a.id < b.id; };
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end(), less);
    std::vector<InstanceId> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(keys[i].id);
    return out;
}

void compute_mean_std(const std::vector<double>& xs, double& mean, double& std) {
    const double n = static_cast<double>(xs.size());
    KahanSum s;
    for (double x : xs) s.add(x);
    mean = s.sum / n;
    KahanSum sq;
    for (double x : xs) sq.add((x - mean) * (x - mean));
    std = std::sqrt(sq.sum / n);
}

std::vector<InstanceStats> compute_stats(const dynamics::TrainingDynamics& d) {
    dynamics::validate(d);
    std::vector<InstanceStats> out;
    out.reserve(d.records.size());
    for (const auto& r : d.records) {
        InstanceStats s;
        s.id = r.id;
        compute_mean_std(r.p_true, s.mean, s.std);
        out.push_back(s);
    }
    return out;
}

DataMap categorize(std::vector<InstanceStats> stats, double q, std::string run_id) {
    check_q(q);
    if (stats.empty()) throw UsageError("cannot categorize an empty set of instances");
    std::sort(stats.begin(), stats.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < stats.size(); ++i)
        if (stats[i].id == stats[i - 1].id) throw DataError("duplicate instance id " + std::to_string(stats[i].id));

    const std::size_t k = sel_count(stats.size(), q);
    DataMap m;
    m.run_id = std::move(run_id);
    m.q = q;
    m.ambiguous = sorted(rank_by(stats, Stat::std, true, k));
    m.hard_to_learn = sorted(rank_by(stats, Stat::mean, false, k));

    std::vector<InstanceId> flagged;
    std::set_union(m.ambiguous.begin(), m.ambiguous.end(), m.hard_to_learn.begin(), m.hard_to_learn.end(),
                   std::back_inserter(flagged));
    for (const auto& s : stats)
        if (!std::binary_search(flagged.begin(), flagged.end(), s.id)) m.easy.push_back(s.id);
    m.stats = std::move(stats);
    return m;
}

DataMap build_map(const dynamics::TrainingDynamics& d, double q) {
    check_q(q);
    return categorize(compute_stats(d), q, d.run_id);
}

std::vector<InstanceId> select_subset(const DataMap& map, SubsetKind kind, std::optional<std::uint64_t> seed) {
    switch (kind) {
        case SubsetKind::ambiguous: return map.ambiguous;
        case SubsetKind::hard_to_learn: return map.hard_to_learn;
        case SubsetKind::easy: return map.easy;
        case SubsetKind::random: break;
    }
    if (!seed) throw UsageError("random subset selection requires a seed");
    std::vector<InstanceId> ids;
    ids.reserve(map.stats.size());
    for (const auto& s : map.stats) ids.push_back(s.id);
    const std::size_t k = sel_count(ids.size(), map.q);
    Rng rng(*seed);
    // partial Fisher-Yates: the first k slots become the sample
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(ids.size() - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(k);
    return sorted(std::move(ids));
}

std::string map_to_json(const DataMap& map) {
    // Assembled by hand to keep the documented key order and exact doubles.
    std::string out = "{\"schema_version\":\"";
    out += kMapSchema;
    out += "\",\"run_id\":" + json(map.run_id).dump() + ",\"q\":" + format_exact(map.q) + ",\"stats\":[";
    for (std::size_t i = 0; i < map.stats.size(); ++i) {
        const auto& s = map.stats[i];
        if (i) out += ',';
        out += "{\"id\":" + std::to_string(s.id) + ",\"mean\":" + format_exact(s.mean) +
               ",\"std\":" + format_exact(s.std) + "}";
    }
    out += "]";
    auto ids = [&out](const char* key, const std::vector<InstanceId>& v) {
        out += ",\"";
        out += key;
        out += "\":[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(v[i]);
        }
        out += "]";
    };
    ids("ambiguous", map.ambiguous);
    ids("hard_to_learn", map.hard_to_learn);
    ids("easy", map.easy);
    out += "}\n";
    return out;
}

DataMap map_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError("map file is not a JSON object");
    try {
        if (j.at("schema_version").get<std::string>() != kMapSchema)
            throw DataError("unknown map schema_version \"" + j.at("schema_version").get<std::string>() + "\"");
        DataMap m;
        m.run_id = j.at("run_id").get<std::string>();
        m.q = j.at("q").get<double>();
        for (const auto& s : j.at("stats")) m.stats.push_back({s.at("id").get<InstanceId>(), s.at("mean").get<double>(),
                                                               s.at("std").get<double>()});
        m.ambiguous = sorted(j.at("ambiguous").get<std::vector<InstanceId>>());
        m.hard_to_learn = sorted(j.at("hard_to_learn").get<std::vector<InstanceId>>());
        m.easy = sorted(j.at("easy").get<std::vector<InstanceId>>());
        std::sort(m.stats.begin(), m.stats.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid map file: ") + e.what());
    }
}

DataMap read_map_file(const std::string& path) {
    try {
        return map_from_json(read_text_file(path));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_map_file(const DataMap& map, const std::string& path) { write_text_file(path, map_to_json(map)); }

}  // namespace ftft::cartography
