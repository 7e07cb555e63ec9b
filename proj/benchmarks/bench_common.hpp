#pragma once

#include "dyne/laplacian.hpp"
#include "dyne/types.hpp"

#include <random>
#include <vector>

namespace bench_common {

using namespace dyne;

inline SpMat random_graph(Index n, double avg_degree, std::uint64_t seed) {
    const double p = avg_degree / static_cast<double>(n - 1);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Triplet> trip;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (unit(rng) < p) {
                trip.emplace_back(i, j, 1.0);
                trip.emplace_back(j, i, 1.0);
            }
    // ring backbone keeps the graph connected
    for (Index i = 0; i < n; ++i) {
        const Index j = (i + 1) % n;
        trip.emplace_back(i, j, 1.0);
        trip.emplace_back(j, i, 1.0);
    }
    SpMat m(n, n);
    m.setFromTriplets(trip.begin(), trip.end(), [](double a, double) { return a; });
    m.makeCompressed();
    return m;
}

// sparse symmetric reweighting of `edges` existing edges
inline LaplacianDelta edge_delta(const SpMat& g, int edges, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Triplet> trip;
    int added = 0;
    for (Index col = 0; col < g.outerSize() && added < edges; ++col)
        for (SpMat::InnerIterator it(g, col); it && added < edges; ++it)
            if (it.row() < col && unit(rng) < 0.05) {
                trip.emplace_back(it.row(), col, 0.1);
                trip.emplace_back(col, it.row(), 0.1);
                ++added;
            }
    SpMat dAdj(g.rows(), g.cols());
    dAdj.setFromTriplets(trip.begin(), trip.end());
    const SpMat newAdj = SpMat(g + dAdj);
    return delta_laplacian(build_laplacian(g), build_laplacian(newAdj));
}

} // namespace bench_common
