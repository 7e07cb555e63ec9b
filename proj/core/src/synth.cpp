#include "dyne/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace dyne {

namespace {

int block_of(Index i, Index n, int blocks) {
    return static_cast<int>((i * blocks) / n);
}

double attr_mean(int block, Index j, int blocks, double signal) {
    return 0.2 + (static_cast<int>(j % blocks) == block ? signal : 0.0);
}

std::uint64_t pair_key(Index i, Index j, Index n) {
    return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(j);
}

} // namespace

void SbmSpec::validate() const {
    if (n < 2)
        throw Error("sbm: n must be >= 2");
    if (blocks < 1 || static_cast<Index>(blocks) > n)
        throw Error("sbm: blocks must be in [1, n]");
    if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0))
        throw Error("sbm: need 0 <= p_out <= p_in <= 1");
    if (attr_dim < 1)
        throw Error("sbm: attr_dim must be >= 1");
    if (drift_rate < 0.0 || drift_rate > 1.0)
        throw Error("sbm: drift_rate must be in [0, 1]");
    if (steps < 0)
        throw Error("sbm: steps must be >= 0");
    // expected edge count; a generator that almost surely emits nothing is a
    // configuration error
    double expected = 0.0;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            expected += block_of(i, n, blocks) == block_of(j, n, blocks) ? p_in : p_out;
    if (expected < 1.0)
        throw Error("sbm: parameters imply an empty graph");
}

SynthData generate(const SbmSpec& spec) {
    spec.validate();
    const Index n = spec.n;
    const Index d = spec.attr_dim;

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SynthData out;
    out.labels.resize(n);
    for (Index i = 0; i < n; ++i)
        out.labels[i] = block_of(i, n, spec.blocks);

    // initial edges
    std::set<std::pair<Index, Index>> edges; // i < j
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            const double p = out.labels[i] == out.labels[j] ? spec.p_in : spec.p_out;
            if (unit(rng) < p)
                edges.emplace(i, j);
        }

    // initial attributes: block-shifted Gaussian clamped at zero
    Mat attrs(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) {
            const double mean = attr_mean(out.labels[i], j, spec.blocks, spec.attr_signal);
            attrs(i, j) = std::max(0.0, mean + 0.5 * gauss(rng));
        }

    auto snapshot_from_state = [&] {
        std::vector<Triplet> adjTrip;
        adjTrip.reserve(edges.size() * 2);
        for (const auto& [i, j] : edges) {
            adjTrip.emplace_back(i, j, 1.0);
            adjTrip.emplace_back(j, i, 1.0);
        }
        SpMat adjacency(n, n);
        adjacency.setFromTriplets(adjTrip.begin(), adjTrip.end());
        SpMat attributes = attrs.sparseView();
        return Snapshot::make(std::move(adjacency), std::move(attributes));
    };
    out.snapshot = snapshot_from_state();

    out.deltas.reserve(spec.steps);
    for (int t = 0; t < spec.steps; ++t) {
        // edge slot flips
        const long edgeFlips = std::lround(spec.drift_rate * static_cast<double>(edges.size()));
        std::vector<Triplet> adjTrip;
        std::unordered_set<std::uint64_t> usedPairs;
        for (long f = 0; f < edgeFlips; ++f) {
            for (int attempt = 0; attempt < 1000; ++attempt) {
                Index i = static_cast<Index>(unit(rng) * static_cast<double>(n)) % n;
                Index j = static_cast<Index>(unit(rng) * static_cast<double>(n)) % n;
                if (i == j)
                    continue;
                if (i > j)
                    std::swap(i, j);
                if (!usedPairs.insert(pair_key(i, j, n)).second)
                    continue;
                const auto pos = edges.find({i, j});
                const double w = pos == edges.end() ? 1.0 : -1.0;
                adjTrip.emplace_back(i, j, w);
                adjTrip.emplace_back(j, i, w);
                if (pos == edges.end())
                    edges.emplace(i, j);
                else
                    edges.erase(pos);
                break;
            }
        }

        // attribute entry redraws; count follows the current nonzero mass
        long nnzAttrs = 0;
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < d; ++j)
                if (attrs(i, j) != 0.0)
                    ++nnzAttrs;
        const long redraws = std::lround(spec.drift_rate * static_cast<double>(nnzAttrs));
        std::vector<Triplet> attrTrip;
        std::unordered_set<std::uint64_t> usedSlots;
        for (long r = 0; r < redraws; ++r) {
            for (int attempt = 0; attempt < 1000; ++attempt) {
                const Index i = static_cast<Index>(unit(rng) * static_cast<double>(n)) % n;
                const Index j = static_cast<Index>(unit(rng) * static_cast<double>(d)) % d;
                if (!usedSlots.insert(pair_key(i, j, d)).second)
                    continue;
                const double mean = attr_mean(out.labels[i], j, spec.blocks, spec.attr_signal);
                const double fresh = std::max(0.0, mean + 0.5 * gauss(rng));
                double change = fresh - attrs(i, j);
                double applied = attrs(i, j) + change;
                if (applied < 0.0) { // rounding guard: land exactly at zero instead
                    change = -attrs(i, j);
                    applied = 0.0;
                }
                if (change != 0.0)
                    attrTrip.emplace_back(i, j, change);
                // track the value the consumer will hold after applying the delta
                attrs(i, j) = applied;
                break;
            }
        }

        SpMat dAdj(n, n), dAttr(n, d);
        dAdj.setFromTriplets(adjTrip.begin(), adjTrip.end());
        dAttr.setFromTriplets(attrTrip.begin(), attrTrip.end());
        out.deltas.push_back(Delta::make(std::move(dAdj), std::move(dAttr)));
    }
    return out;
}

} // namespace dyne
