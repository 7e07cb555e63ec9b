#include "dyne/perturb.hpp"

#include "bench_common.hpp"

#include <benchmark/benchmark.h>

using namespace dyne;

// Eigenvalue shift cost is O(nnz(delta)); sweep the delta size.
static void BM_DeltaEigenvalue(benchmark::State& state) {
    const Index n = 4000;
    const Index entries = state.range(0);
    EigenPair pair;
    pair.value = 0.5;
    pair.vector = Vec::LinSpaced(n, 0.01, 1.0);

    std::vector<Triplet> trip;
    std::mt19937_64 rng(entries);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index e = 0; e < entries / 2; ++e) {
        const Index i = static_cast<Index>(unit(rng) * n) % n;
        const Index j = (i + 1 + static_cast<Index>(unit(rng) * (n - 1))) % n;
        trip.emplace_back(i, j, 0.01);
        trip.emplace_back(j, i, 0.01);
    }
    LaplacianDelta d;
    d.degrees.resize(n);
    d.laplacian.resize(n, n);
    d.laplacian.setFromTriplets(trip.begin(), trip.end());

    for (auto _ : state)
        benchmark::DoNotOptimize(delta_eigenvalue(pair, d));
    state.SetComplexityN(d.laplacian.nonZeros());
}
BENCHMARK(BM_DeltaEigenvalue)
    ->RangeMultiplier(4)
    ->Range(1 << 10, 1 << 18)
    ->Complexity(benchmark::oN)
    ->Unit(benchmark::kMicrosecond);

// Full online update vs a fresh solve at the same size.
static void BM_UpdateState(benchmark::State& state) {
    const Index n = state.range(0);
    const SpMat g = bench_common::random_graph(n, 8.0, 23);
    const LaplacianPair lap = build_laplacian(g);
    const SpectralState s = solve_topk(lap, 10, 23);
    const LaplacianDelta d = bench_common::edge_delta(g, 50, 23);
    LaplacianPair lapNew = lap;
    for (SpVec::InnerIterator it(d.degrees); it; ++it)
        lapNew.degrees[it.index()] += it.value();
    lapNew.laplacian = SpMat(lap.laplacian + d.laplacian);

    for (auto _ : state) {
        auto [next, report] = update_state(s, d, lapNew);
        benchmark::DoNotOptimize(next.pairs.front().value);
        benchmark::DoNotOptimize(report.flagged_count);
    }
}
BENCHMARK(BM_UpdateState)->Arg(1000)->Arg(2000)->Arg(5000)->Unit(benchmark::kMillisecond);
