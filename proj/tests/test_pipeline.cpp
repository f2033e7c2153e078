// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "ftft/error.hpp"
#include "ftft/format.hpp"
#include "ftft/pipeline.hpp"
#include "ftft/transfer.hpp"
#include "oracles.hpp"

namespace {

namespace pl = ftft::pipeline;
namespace toy = ftft::toy;
using ftft::cartography::SubsetKind;

TEST(EarlyStop, Examples) {
    EXPECT_EQ(pl::early_stop({0.1, 0.2, 0.3, 0.4}, 2), (pl::StopPoint{3, 3, false}));
    EXPECT_EQ(pl::early_stop({0.5, 0.6, 0.55, 0.58}, 2), (pl::StopPoint{1, 3, true}));
    EXPECT_EQ(pl::early_stop({0.7}, 2), (pl::StopPoint{0, 0, false}));
}

TEST(EarlyStop, RejectsEmptySeriesAndZeroPatience) {
    EXPECT_THROW(pl::early_stop({}, 2), ftft::UsageError);
    EXPECT_THROW(pl::early_stop({0.5}, 0), ftft::UsageError);
}

TEST(EarlyStop, ImprovementIsStrictBeyondTolerance) {
    EXPECT_EQ(pl::early_stop({0.5, 0.5 + 5e-10, 0.5}, 2), (pl::StopPoint{0, 2, true}));
    EXPECT_EQ(pl::early_stop({0.5, 0.5 + 2e-9, 0.5}, 2).best, 1u);
    EXPECT_EQ(pl::early_stop({0.3, 0.3, 0.3, 0.3}, 3), (pl::StopPoint{0, 3, true}));
}

TEST(EarlyStop, MatchesBruteForceAndIgnoresTail) {
    ftft::Rng rng(17);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto s = oracle::random_series(rng);
        const std::size_t k = 1 + rng.below(4);
        const auto got = pl::early_stop(s, k);
        const auto [best, stop] = oracle::brute_force_stop(s, k);
        ASSERT_EQ(got.best, best);
        ASSERT_EQ(got.stop, stop);
        ASSERT_EQ(pl::early_stop(s, k), got);
        // Truncating after the stop point never changes the answer.
        const std::vector<double> prefix(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(got.stop) + 1);
        ASSERT_EQ(pl::early_stop(prefix, k), got);
        ASSERT_LE(got.stop - got.best, k);
        ASSERT_EQ(*std::max_element(prefix.begin(), prefix.end()) - s[got.best] <= 1e-9, true);
    }
}

TEST(EarlyStop, ChargedCostNeverDecreasesWithPatience) {
    ftft::Rng rng(23);
    for (int trial = 0; trial < 500; ++trial) {
        const auto s = oracle::random_series(rng);
        std::size_t prev = 0;
        for (std::size_t k = 1; k <= 6; ++k) {
            const auto p = pl::early_stop(s, k);
            const std::size_t charged = p.stop + 1;
            ASSERT_GE(charged, prev);
            ASSERT_EQ(charged, ftft::cost::charged_checkpoints(p.best, k, s.size()));
            prev = charged;
        }
    }
}

TEST(PatienceTracker, OnlineAgreesWithBatch) {
    const std::vector<double> s = {0.2, 0.4, 0.3, 0.45, 0.44, 0.43, 0.9};
    pl::PatienceTracker t(2);
    std::size_t fed = 0;
    while (fed < s.size() && !t.update(s[fed])) ++fed;
    EXPECT_EQ(t.point(), pl::early_stop(s, 2));
    EXPECT_EQ(fed, 5u);
}

TEST(StopMetric, ParseAndValues) {
    EXPECT_EQ(pl::parse_stop_metric("id_accuracy"), pl::StopMetric::id_accuracy);
    EXPECT_EQ(pl::parse_stop_metric("hard_slice_accuracy"), pl::StopMetric::hard_slice_accuracy);
    EXPECT_EQ(pl::parse_stop_metric("mean_of_listed"), pl::StopMetric::mean_of_listed);
    EXPECT_THROW(pl::parse_stop_metric("loss"), ftft::UsageError);
    const toy::CheckpointMetrics m{0.8, 0.4};
    EXPECT_DOUBLE_EQ(pl::metric_value(m, pl::StopMetric::mean_of_listed), 0.6);
}

// A small, fast setting shared by the orchestration tests.
struct Small {
    toy::SyntheticDataset ds = toy::generate_dataset(3, 600, 2, {});
    pl::ModelConfig linear{"linear", {toy::ModelKind::linear, 0, 1.0}, config(0.2)};
    pl::ModelConfig mlp{"mlp", {toy::ModelKind::mlp, 16, 1.0}, config(0.5)};

    static toy::TrainConfig config(double lr) {
        toy::TrainConfig t;
        t.max_steps = 600;
        t.checkpoint_every = 60;
        t.peak_lr = lr;
        t.seed = 4;
        return t;
    }
    ftft::cost::RunCost baseline(const pl::ModelConfig& m) const {
        return pl::full_run_cost(m, m.spec.num_params(ds.dim(), ds.num_classes));
    }
};

TEST(RunErm, NoStopRunsAllSteps) {
    Small s;
    const auto r = pl::run_erm(s.ds, s.mlp, {}, s.baseline(s.mlp));
    EXPECT_EQ(r.method, "ERM");
    EXPECT_EQ(r.main_run.steps_trained, 600u);
    EXPECT_EQ(r.charged_checkpoints, 10u);
    EXPECT_FALSE(r.reference_run.has_value());
    EXPECT_EQ(ftft::cost::display(r.costs.relative_total), "100.00");
}

TEST(RunErm, PatienceStopsNoLaterThanFullRun) {
    Small s;
    const auto r = pl::run_erm(s.ds, s.mlp, {pl::StopKind::patience, 1, pl::StopMetric::id_accuracy}, s.baseline(s.mlp));
    EXPECT_EQ(r.method, "ERM(ES)");
    EXPECT_LE(r.stop_checkpoint, 9u);
    EXPECT_LE(r.best_checkpoint, r.stop_checkpoint);
    EXPECT_EQ(r.metric_curves().size(), r.stop_checkpoint + 1);
    EXPECT_LE(r.costs.relative_total, 100.0);
}

TEST(RunCartography, EqualSizedFullRunsCostTwoHundred) {
    Small s;
    const auto r = pl::run_cartography(s.ds, s.mlp, s.mlp, 0.33, SubsetKind::ambiguous, s.baseline(s.mlp));
    EXPECT_EQ(r.method, "DM-ambiguous");
    EXPECT_EQ(ftft::cost::display(r.costs.relative_total), "200.00");
    EXPECT_EQ(r.subset_size, ftft::cartography::sel_count(s.ds.train.size(), 0.33));
    EXPECT_EQ(r.main_run.steps_trained, 600u);
    ASSERT_TRUE(r.map.has_value());
    EXPECT_EQ(r.main_run.dynamics.records.size(), s.ds.train.size());
}

TEST(RunCartography, RandomSubsetIsReproducible) {
    Small s;
    const auto a = pl::run_cartography(s.ds, s.linear, s.mlp, 0.33, SubsetKind::random, s.baseline(s.mlp));
    const auto b = pl::run_cartography(s.ds, s.linear, s.mlp, 0.33, SubsetKind::random, s.baseline(s.mlp));
    EXPECT_EQ(a.main_run.dynamics, b.main_run.dynamics);
    EXPECT_EQ(a.method, "DM-random");
}

TEST(RunCartography, ReusesGivenReference) {
    Small s;
    const auto ref = toy::run_reference(s.ds, s.linear.spec, s.linear.train);
    const auto a = pl::run_cartography(s.ds, s.linear, s.mlp, 0.33, SubsetKind::ambiguous, s.baseline(s.mlp), &ref);
    const auto b = pl::run_cartography(s.ds, s.linear, s.mlp, 0.33, SubsetKind::ambiguous, s.baseline(s.mlp));
    EXPECT_EQ(a.main_run.dynamics, b.main_run.dynamics);
    EXPECT_THROW(pl::run_cartography(s.ds, s.linear, s.mlp, 0.6, SubsetKind::ambiguous, s.baseline(s.mlp)),
                 ftft::UsageError);
}

TEST(RunFtft, ChargesThroughStopAndUndercutsCartography) {
    Small s;
    const pl::StopPolicy stop{pl::StopKind::patience, 2, pl::StopMetric::hard_slice_accuracy};
    const auto f = pl::run_ftft(s.ds, s.linear, s.mlp, 0.33, stop, s.baseline(s.mlp));
    const auto d = pl::run_cartography(s.ds, s.linear, s.mlp, 0.33, SubsetKind::ambiguous, s.baseline(s.mlp));
    EXPECT_EQ(f.method, "FTFT");
    EXPECT_TRUE(f.warnings.empty());
    EXPECT_EQ(f.charged_checkpoints, ftft::cost::charged_checkpoints(f.best_checkpoint, 2, 10));
    EXPECT_LE(f.stop_checkpoint - f.best_checkpoint, 2u);
    const auto series = pl::metric_series(f.metric_curves(), stop.metric);
    EXPECT_DOUBLE_EQ(series[f.best_checkpoint], *std::max_element(series.begin(), series.end()));
    if (f.charged_checkpoints < 10) EXPECT_LT(f.costs.relative_total, d.costs.relative_total);
    // Ambiguous subset and map are those of the same reference.
    EXPECT_EQ(f.map->ambiguous, d.map->ambiguous);
    EXPECT_EQ(f.main_run.steps_trained, f.charged_checkpoints * 60);
}

TEST(RunFtft, CostTracksPatience) {
    Small s;
    double prev = 0.0;
    for (std::size_t k = 1; k <= 4; ++k) {
        const auto f = pl::run_ftft(s.ds, s.linear, s.mlp, 0.33, {pl::StopKind::patience, k, pl::StopMetric::id_accuracy},
                                    s.baseline(s.mlp));
        EXPECT_GE(f.costs.relative_total, prev) << k;
        prev = f.costs.relative_total;
    }
}

TEST(RunFtft, WarnsWhenReferenceIsNotCheaper) {
    Small s;
    const auto f = pl::run_ftft(s.ds, s.mlp, s.linear, 0.33, {pl::StopKind::patience, 2, pl::StopMetric::id_accuracy},
                                s.baseline(s.mlp));
    ASSERT_EQ(f.warnings.size(), 1u);
    EXPECT_NE(f.warnings[0].find("not cheaper"), std::string::npos);
    EXPECT_THROW(pl::run_ftft(s.ds, s.linear, s.mlp, 0.33, {}, s.baseline(s.mlp)), ftft::UsageError);
}

TEST(Config, ShippedConfigParses) {
    const auto c = pl::parse_benchmark_config(ftft::read_text_file(FTFT_BENCHMARK_CONFIG));
    EXPECT_EQ(c.seeds.size(), 5u);
    EXPECT_EQ(c.reference, "linear");
    EXPECT_EQ(c.main, "mlp");
    EXPECT_DOUBLE_EQ(c.q, 0.33);
    EXPECT_EQ(c.stop.k, 2u);
    EXPECT_EQ(c.stop.metric, pl::StopMetric::hard_slice_accuracy);
    EXPECT_EQ(c.model("mlp").train.batch_size, 32u);
    EXPECT_DOUBLE_EQ(c.model("mlp").train.warmup_fraction, 0.10);
}

TEST(Config, Errors) {
    auto usage_message = [](const std::string& text) {
        try {
            pl::parse_benchmark_config(text);
        } catch (const ftft::UsageError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_EQ(usage_message(R"({"models":{"m":{"kind":"mlp"}},"main":"m","reference":"m"})"), "seeds required");
    EXPECT_EQ(usage_message(R"({"seeds":[]})"), "seeds required");
    EXPECT_EQ(usage_message(R"({"seeds":[1]})"), "models required");
    EXPECT_NE(usage_message(R"({"seeds":[1],"models":{"m":{"kind":"mlp"}}})").find("unknown model"), std::string::npos);
    EXPECT_EQ(usage_message(R"({"seeds":[1],"q":0.9,"models":{"m":{"kind":"mlp"}},"main":"m","reference":"m"})"),
              "q must be in (0, 0.5]");
    EXPECT_NE(usage_message("not json").find("JSON"), std::string::npos);
    EXPECT_NO_THROW(pl::parse_benchmark_config(R"({"models":{"m":{"kind":"mlp"}},"main":"m","reference":"m"})", false));
}

TEST(Bundle, MethodSlugs) {
    EXPECT_EQ(pl::method_slug("ERM"), "erm");
    EXPECT_EQ(pl::method_slug("ERM(ES)"), "erm_es");
    EXPECT_EQ(pl::method_slug("DM-ambiguous"), "dm_ambiguous");
    EXPECT_EQ(pl::method_slug("FTFT"), "ftft");
}

TEST(Benchmark, SeedReportsShareCadenceAndAllMethods) {
    auto c = pl::default_benchmark_config();
    c.num_instances = 400;
    for (auto& [name, m] : c.models) {
        m.train.max_steps = 400;
        m.train.checkpoint_every = 40;
    }
    const auto s = pl::run_seed(c, 1);
    std::vector<std::string> methods;
    for (const auto& r : s.reports) methods.push_back(r.method);
    EXPECT_EQ(methods, (std::vector<std::string>{"ERM", "ERM(ES)", "DM-random", "DM-ambiguous", "FTFT"}));
    for (const auto& r : s.reports) {
        EXPECT_EQ(r.main_run.checkpoints_planned, 10u) << r.method;
        EXPECT_LE(r.best_checkpoint, r.stop_checkpoint);
    }
    EXPECT_EQ(s.easy_ratios.size(), 2 * c.easy_ratio_qs.size());
    EXPECT_EQ(s.references.size(), 2u);
}

// Outcomes of the default benchmark for each default seed, computed once.
const std::vector<pl::SeedOutcome>& default_outcomes() {
    static const auto outcomes = [] {
        const auto c = pl::default_benchmark_config();
        std::vector<pl::SeedOutcome> out;
        for (auto seed : c.seeds) out.push_back(pl::run_seed(c, seed));
        return out;
    }();
    return outcomes;
}

TEST(DefaultBenchmark, WeakReferenceHasLowerEasyRatioAtHalf) {
    for (const auto& s : default_outcomes()) {
        auto ratio = [&](const std::string& model) {
            const auto& r = s.references.at(model);
            return ftft::transfer::easy_ratio(
                ftft::cartography::categorize(ftft::cartography::compute_stats(r.run.dynamics), 0.5));
        };
        EXPECT_LE(ratio("linear") + 0.05, ratio("mlp")) << "seed " << s.seed;
    }
}

TEST(DefaultBenchmark, ErmTrailsDataMapAtOneThirdOfTraining) {
    const auto& outcomes = default_outcomes();
    const auto& t = pl::default_benchmark_config().model("mlp").train;
    const std::size_t i = t.max_steps / 3 / t.checkpoint_every - 1;
    std::size_t behind = 0;
    for (const auto& s : outcomes) {
        const auto& erm = s.report("ERM").main_run;
        const auto& dm = s.report("DM-ambiguous").main_run;
        if (erm.metrics[i].hard_slice_accuracy < dm.metrics[i].hard_slice_accuracy) ++behind;
    }
    EXPECT_GT(2 * behind, outcomes.size());
}

TEST(DefaultBenchmark, FtftCostsAtMostTwoThirdsOfErmAtEqualAccuracy) {
    const auto& outcomes = default_outcomes();
    std::size_t ok = 0;
    for (const auto& s : outcomes) {
        const auto& erm = s.report("ERM");
        const auto& f = s.report("FTFT");
        if (f.costs.relative_total <= 0.67 * erm.costs.relative_total &&
            f.main_run.metrics[f.best_checkpoint].hard_slice_accuracy >= erm.main_run.metrics.back().hard_slice_accuracy)
            ++ok;
    }
    EXPECT_GE(ok, 3u);
}

}  // namespace
