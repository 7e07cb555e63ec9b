#pragma once

#include "dyne/consensus.hpp"
#include "dyne/perturb.hpp"
#include "dyne/similarity.hpp"
#include "dyne/snapshot.hpp"
#include "dyne/spectral.hpp"

#include <cstdint>
#include <string>

namespace dyne {

struct RunConfig {
    int k = 8;                     // intermediate dimension per source
    int l = 8;                     // consensus dimension, 1 <= l <= 2k
    double gap_tol = 1e-6;         // small-gap guard scale
    double ridge = -1.0;           // consensus ridge; < 0 selects the default
    int refresh_every = 0;         // 0 disables the interval trigger
    double refresh_residual = -1.0; // < 0 selects 1e-3 * ||L||_F per branch
    std::uint64_t seed = 0;
    int threads = 1;               // > 1 runs the two branch updates concurrently

    void validate() const;
};

struct DriftStats {
    double net_residual = 0.0;      // last step, max over pairs
    double attr_residual = 0.0;
    double cum_net_residual = 0.0;  // summed over steps
    double cum_attr_residual = 0.0;
    long net_flagged = 0;           // cumulative small-gap flags
    long attr_flagged = 0;
    int refresh_count = 0;
    int last_refresh_step = 0;
    std::string last_refresh_reason = "init";
};

/// Full pipeline state for one embedding stream. The snapshot always
/// reflects every delta applied so far; states and snapshot never diverge.
struct EmbeddingRun {
    RunConfig config;
    int step = 0;
    Snapshot snapshot;
    SimilarityGraph similarity;
    SpectralState net;
    SpectralState attr;
    ConsensusProjection projection;
    ConsensusEmbedding embedding;
    DriftStats drift;
    // transient diagnostics of the most recent perturbation step; empty
    // after init_offline or a refresh
    PerturbReport last_net_report;
    PerturbReport last_attr_report;

    bool refresh_fired() const {
        return step > 0 && drift.last_refresh_step == step;
    }
};

/// Offline initialization: builds the attribute similarity, both Laplacian
/// pairs (degrees floored when isolated nodes exist), solves both
/// generalized eigen-problems, and fuses. step = 0.
EmbeddingRun init_offline(Snapshot snapshot, RunConfig config);

/// One online step: advances the snapshot, perturbs both spectral states
/// from the sparse Laplacian deltas, re-fuses, and applies the refresh
/// policy (interval / residual / small-gap guard). A triggered refresh
/// performs init_offline on the advanced snapshot internally and is
/// recorded in the drift stats rather than surfaced as an error.
EmbeddingRun step_online(const EmbeddingRun& run, const Delta& delta);

} // namespace dyne
