#include "dyne/pipeline.hpp"

#include "dyne/synth.hpp"

#include <benchmark/benchmark.h>

using namespace dyne;

namespace {

SynthData benchmark_data(Index n, int steps) {
    SbmSpec spec;
    spec.n = n;
    spec.blocks = 4;
    spec.p_in = 0.012;
    spec.p_out = 0.002;
    spec.attr_dim = 24;
    spec.attr_signal = 1.0;
    spec.drift_rate = 0.001;
    spec.steps = steps;
    spec.seed = 3;
    return generate(spec);
}

RunConfig benchmark_config(int k) {
    RunConfig c;
    c.k = k;
    c.l = k;
    c.seed = 3;
    return c;
}

} // namespace

static void BM_InitOffline(benchmark::State& state) {
    const SynthData data = benchmark_data(state.range(0), 0);
    const RunConfig config = benchmark_config(10);
    for (auto _ : state) {
        auto run = init_offline(data.snapshot, config);
        benchmark::DoNotOptimize(run.embedding.y.sum());
    }
}
BENCHMARK(BM_InitOffline)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_StepOnline(benchmark::State& state) {
    const SynthData data = benchmark_data(state.range(0), 1);
    const EmbeddingRun run = init_offline(data.snapshot, benchmark_config(10));
    for (auto _ : state) {
        auto next = step_online(run, data.deltas[0]);
        benchmark::DoNotOptimize(next.embedding.y.sum());
    }
}
BENCHMARK(BM_StepOnline)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
