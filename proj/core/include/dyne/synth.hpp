#pragma once

#include "dyne/snapshot.hpp"
#include "dyne/types.hpp"

#include <cstdint>
#include <vector>

namespace dyne {

/// Planted-partition generator for a dynamic attributed network: block
/// structure in the edges, block-shifted non-negative attributes, and a
/// stream of small symmetric perturbations.
struct SbmSpec {
    Index n = 200;
    int blocks = 3;
    double p_in = 0.15;
    double p_out = 0.02;
    Index attr_dim = 20;
    double attr_signal = 1.0; // per-block attribute mean shift
    double drift_rate = 0.001; // fraction of edges / attribute entries perturbed per step
    int steps = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthData {
    Snapshot snapshot;         // time step 0
    std::vector<Delta> deltas; // steps entries, each relative to the previous state
    std::vector<int> labels;   // block id per node
};

/// Deterministic per seed. Each delta flips drift_rate * nnz(A)/2 edge slots
/// (add absent / remove present, symmetric) and re-draws drift_rate * nnz(X)
/// attribute entries from the owning node's block distribution.
SynthData generate(const SbmSpec& spec);

} // namespace dyne
