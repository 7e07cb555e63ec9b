#include "dyne/spectral.hpp"

#include "bench_common.hpp"

#include <benchmark/benchmark.h>

using namespace dyne;

static void BM_SolveTopK(benchmark::State& state) {
    const Index n = state.range(0);
    const int k = static_cast<int>(state.range(1));
    const SpMat g = bench_common::random_graph(n, 8.0, 42);
    const LaplacianPair lap = build_laplacian(g);
    for (auto _ : state) {
        auto s = solve_topk(lap, k, 1);
        benchmark::DoNotOptimize(s.pairs.front().value);
    }
}
BENCHMARK(BM_SolveTopK)
    ->ArgsProduct({{500, 1000, 2000, 5000}, {10}})
    ->Unit(benchmark::kMillisecond);

static void BM_SolveTopK_Dim(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    const SpMat g = bench_common::random_graph(2000, 8.0, 42);
    const LaplacianPair lap = build_laplacian(g);
    for (auto _ : state) {
        auto s = solve_topk(lap, k, 1);
        benchmark::DoNotOptimize(s.pairs.front().value);
    }
}
BENCHMARK(BM_SolveTopK_Dim)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_Reorthonormalize(benchmark::State& state) {
    const Index n = state.range(0);
    const SpMat g = bench_common::random_graph(n, 8.0, 7);
    SpectralState s = solve_topk(build_laplacian(g), 10, 7);
    for (auto _ : state) {
        SpectralState copy = s;
        benchmark::DoNotOptimize(reorthonormalize(std::move(copy)).pairs.front().value);
    }
}
BENCHMARK(BM_Reorthonormalize)->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond);
