// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <sstream>

#include "ftft/error.hpp"
#include "ftft/rng.hpp"
#include "ftft/toy.hpp"

namespace ftft::toy {

std::string_view to_string(Tier t) {
    switch (t) {
        case Tier::simple: return "simple";
        case Tier::ambiguous_band: return "ambiguous_band";
        case Tier::difficult: return "difficult";
    }
    return "?";
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::id_eval: return "id_eval";
        case Split::hard_slice_eval: return "hard_slice_eval";
    }
    return "?";
}

namespace {

constexpr int kDim = 4;

struct Sampler {
    Rng& rng;
    int classes;
    const GeneratorParams& p;

    // Point in a random checkerboard cell whose parity (i + j) mod C is y.
    void cell_point(int y, double* b) {
        const int g = p.grid_cells > 0 ? p.grid_cells : classes;
        const double w = 2.0 / g;
        int ci, cj;
        do {
            ci = static_cast<int>(rng.below(static_cast<std::uint64_t>(g)));
            cj = static_cast<int>(rng.below(static_cast<std::uint64_t>(g)));
        } while ((ci + cj) % classes != y);
        b[0] = -1.0 + w * ci + w * rng.uniform(p.cell_margin, 1.0 - p.cell_margin);
        b[1] = -1.0 + w * cj + w * rng.uniform(p.cell_margin, 1.0 - p.cell_margin);
    }

    int draw(Tier tier, double* x) {
        const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
        const double ang = 2.0 * std::numbers::pi * y / classes;
        const double cx = std::cos(ang), cy = std::sin(ang);
        switch (tier) {
            case Tier::simple:
                x[0] = p.simple_radius * cx + rng.normal(0.0, p.simple_noise);
                x[1] = p.simple_radius * cy + rng.normal(0.0, p.simple_noise);
                // Checkerboard coordinates are uninformative, or sit in a cell
                // of the wrong parity and contradict the checkerboard rule.
                if (p.simple_conflict > 0.0 && rng.uniform() < p.simple_conflict) {
                    cell_point((y + 1) % classes, x + 2);
                } else {
                    x[2] = rng.uniform(-1.0, 1.0);
                    x[3] = rng.uniform(-1.0, 1.0);
                }
                break;
            case Tier::ambiguous_band: {
                const double r = p.band_cue * rng.uniform(p.band_cue_floor, 1.0);
                x[0] = r * cx + rng.normal(0.0, p.band_noise);
                x[1] = r * cy + rng.normal(0.0, p.band_noise);
                cell_point(y, x + 2);
                break;
            }
            case Tier::difficult:
                x[0] = 0.0;
                x[1] = 0.0;
                cell_point(y, x + 2);
                break;
        }
        return y;
    }
};

Tier parse_tier(const std::string& s) {
    for (Tier t : {Tier::simple, Tier::ambiguous_band, Tier::difficult})
        if (s == to_string(t)) return t;
    throw DataError("unknown tier \"" + s + "\"");
}

Split parse_split(const std::string& s) {
    for (Split t : {Split::train, Split::id_eval, Split::hard_slice_eval})
        if (s == to_string(t)) return t;
    throw DataError("unknown split \"" + s + "\"");
}

}  // namespace

SyntheticDataset generate_dataset(std::uint64_t seed, std::size_t num_instances, int num_classes, TierMix mix,
                                  const GeneratorParams& params) {
    if (num_instances < 100) throw UsageError("num_instances must be at least 100");
    if (num_classes < 2) throw UsageError("num_classes must be at least 2");
    if (mix.simple < 0 || mix.ambiguous_band < 0 || mix.difficult < 0 ||
        std::abs(mix.simple + mix.ambiguous_band + mix.difficult - 1.0) > 1e-9)
        throw UsageError("tier fractions must be non-negative and sum to 1");
    if (!(params.train_fraction > 0.0 && params.train_fraction < 1.0))
        throw UsageError("train fraction must be in (0, 1)");

    const auto n_train = static_cast<std::size_t>(std::floor(params.train_fraction * static_cast<double>(num_instances)));
    const auto n_hard =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(params.hard_slice_fraction * num_instances)));
    const std::size_t total = num_instances + n_hard;

    SyntheticDataset ds;
    ds.name = "toy-s" + std::to_string(seed);
    ds.seed = seed;
    ds.num_classes = num_classes;
    ds.features.resize(static_cast<Eigen::Index>(total), kDim);
    ds.labels.resize(total);
    ds.tiers.resize(total);
    ds.splits.resize(total);

    Rng rng(seed);
    Sampler sampler{rng, num_classes, params};
    double x[kDim];
    for (std::size_t i = 0; i < total; ++i) {
        Tier tier = Tier::difficult;
        if (i < num_instances) {
            const double u = rng.uniform();
            tier = u < mix.simple ? Tier::simple
                   : u < mix.simple + mix.ambiguous_band ? Tier::ambiguous_band
                                                         : Tier::difficult;
        }
        ds.labels[i] = sampler.draw(tier, x);
        for (int c = 0; c < kDim; ++c) ds.features(static_cast<Eigen::Index>(i), c) = x[c];
        ds.tiers[i] = tier;
        ds.splits[i] = i < n_train ? Split::train : i < num_instances ? Split::id_eval : Split::hard_slice_eval;
        (i < n_train ? ds.train : i < num_instances ? ds.id_eval : ds.hard_slice).push_back(i);
    }
    return ds;
}

CsvTable dataset_csv(const SyntheticDataset& ds) {
    std::vector<std::string> header = {"id", "label", "tier", "split"};
    for (std::size_t c = 0; c < ds.dim(); ++c) header.push_back("f" + std::to_string(c));
    CsvTable t(std::move(header));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i), std::to_string(ds.labels[i]),
                                        std::string(to_string(ds.tiers[i])), std::string(to_string(ds.splits[i]))};
        for (std::size_t c = 0; c < ds.dim(); ++c)
            row.push_back(format_exact(ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c))));
        t.add_row(std::move(row));
    }
    return t;
}

SyntheticDataset dataset_from_csv(const std::string& text, std::string name) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    if (!std::getline(in, line)) throw ParseError(1, "empty dataset file");
    ++lineno;
    const auto header = split(line);
    if (header.size() < 5 || header[0] != "id" || header[1] != "label" || header[2] != "tier" || header[3] != "split")
        throw ParseError(1, "expected header id,label,tier,split,f0..");
    const std::size_t dim = header.size() - 4;

    std::vector<std::vector<double>> rows;
    SyntheticDataset ds;
    ds.name = std::move(name);
    int max_label = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw ParseError(lineno, "wrong number of columns");
        try {
            if (std::stoull(cells[0]) != ds.labels.size()) throw ParseError(lineno, "ids must be 0..n-1 in order");
            const int label = std::stoi(cells[1]);
            if (label < 0) throw ParseError(lineno, "negative label");
            max_label = std::max(max_label, label);
            ds.labels.push_back(label);
            ds.tiers.push_back(parse_tier(cells[2]));
            ds.splits.push_back(parse_split(cells[3]));
            std::vector<double> f(dim);
            for (std::size_t c = 0; c < dim; ++c) f[c] = std::stod(cells[4 + c]);
            rows.push_back(std::move(f));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(lineno, std::string("bad value: ") + e.what());
        }
    }
    ds.num_classes = std::max(2, max_label + 1);
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < dim; ++c)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        (ds.splits[i] == Split::train     ? ds.train
         : ds.splits[i] == Split::id_eval ? ds.id_eval
                                          : ds.hard_slice)
            .push_back(i);
    }
    return ds;
}

}  // namespace ftft::toy
