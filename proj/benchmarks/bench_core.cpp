// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <sstream>

#include "ftft/cartography.hpp"
#include "ftft/dynamics.hpp"
#include "ftft/pipeline.hpp"
#include "ftft/rng.hpp"
#include "ftft/toy.hpp"

namespace {

ftft::dynamics::TrainingDynamics random_dynamics(std::size_t n, std::size_t checkpoints) {
    ftft::Rng rng(7);
    ftft::dynamics::TrainingDynamics d;
    d.run_id = "bench";
    d.model_name = "bench";
    d.num_params = 1000;
    d.dataset_name = "bench";
    d.num_checkpoints = checkpoints;
    d.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ftft::dynamics::Record r{i, 0, {}};
        for (std::size_t c = 0; c < checkpoints; ++c) r.p_true.push_back(rng.uniform());
        d.records.push_back(std::move(r));
    }
    return d;
}

void BM_BuildMap(benchmark::State& state) {
    const auto d = random_dynamics(static_cast<std::size_t>(state.range(0)), 10);
    for (auto _ : state) benchmark::DoNotOptimize(ftft::cartography::build_map(d, 0.33));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildMap)->Arg(1000)->Arg(100000);

void BM_WriteDynamics(benchmark::State& state) {
    const auto d = random_dynamics(static_cast<std::size_t>(state.range(0)), 10);
    for (auto _ : state) {
        std::ostringstream out;
        ftft::dynamics::write_dynamics(d, out);
        benchmark::DoNotOptimize(out.str());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WriteDynamics)->Arg(10000);

void BM_ParseDynamics(benchmark::State& state) {
    const auto d = random_dynamics(static_cast<std::size_t>(state.range(0)), 10);
    std::ostringstream out;
    ftft::dynamics::write_dynamics(d, out);
    const std::string text = out.str();
    for (auto _ : state) {
        std::istringstream in(text);
        benchmark::DoNotOptimize(ftft::dynamics::parse_dynamics(in));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseDynamics)->Arg(10000);

void BM_EarlyStop(benchmark::State& state) {
    ftft::Rng rng(3);
    std::vector<double> series(static_cast<std::size_t>(state.range(0)));
    for (auto& v : series) v = rng.uniform();
    for (auto _ : state) benchmark::DoNotOptimize(ftft::pipeline::early_stop(series, 2));
}
BENCHMARK(BM_EarlyStop)->Arg(1000);

void BM_TrainMlp(benchmark::State& state) {
    const auto ds = ftft::toy::generate_dataset(0, 3000, 2, {});
    ftft::toy::ModelSpec spec{ftft::toy::ModelKind::mlp, 32, 1.0};
    ftft::toy::TrainConfig cfg;
    cfg.max_steps = static_cast<std::size_t>(state.range(0));
    cfg.checkpoint_every = cfg.max_steps / 4;
    for (auto _ : state) benchmark::DoNotOptimize(ftft::toy::train(ds, spec, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainMlp)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
