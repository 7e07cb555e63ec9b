#pragma once

#include "dyne/spectral.hpp"

#include <utility>
#include <vector>

namespace dyne {

struct PerturbOptions {
    // Small-gap guard threshold is gap_tol_scale * max(1, largest eigenvalue
    // in the state). Expansion terms whose eigen-gap falls below it are
    // zeroed and flagged.
    double gap_tol_scale = 1e-6;
};

struct PairReport {
    double delta_value = 0.0;       // eigenvalue shift applied
    double delta_vector_norm = 0.0; // ||delta a||_2 before re-orthonormalization
    double residual = 0.0;          // ||L' a - lambda' D' a||_2 in the new system
    double gap_margin = 0.0;        // min_j |lambda_i - lambda_j|
    bool flagged = false;
};

/// Diagnostics for one online update; indexed like the pre-update pairs.
struct PerturbReport {
    std::vector<PairReport> pairs;
    Mat alpha; // k x k, alpha(i,p) = contribution of old eigenvector p to delta a_i
    int flagged_count = 0;

    double max_residual() const;
};

/// First-order eigenvalue shift a' dL a - lambda a' dD a. Assumes the pair is
/// D-orthonormal with respect to the old D (a' D a = 1), which makes the
/// general-form denominator equal one. Cost O(nnz(dL) + nnz(dD)).
double delta_eigenvalue(const EigenPair& pair, const LaplacianDelta& delta);

/// General form with explicit denominator a' D a for callers whose vectors
/// are not unit-normalized in the D-inner-product.
double delta_eigenvalue(const EigenPair& pair, const LaplacianDelta& delta, const Vec& degrees);

/// gap_tol used when callers pass a negative tolerance.
double default_gap_tol(const SpectralState& state, double scale = 1e-6);

/// First-order eigenvector shift for pair i, expanded in the span of the
/// stored top-k eigenvectors:
///   delta a_i = alpha_ii a_i + sum_{p != i} alpha_ip a_p,
///   alpha_ip = (a_p' dL a_i - lambda_i a_p' dD a_i) / (lambda_i - lambda_p),
///   alpha_ii = -1/2 a_i' dD a_i.
/// Returns (delta a_i, the k alpha weights). Terms with |lambda_i -
/// lambda_p| < gap_tol contribute zero; *flagged reports whether any did.
std::pair<Vec, Vec> delta_eigenvector(const SpectralState& state, int i,
                                      const LaplacianDelta& delta, double gap_tol = -1.0,
                                      bool* flagged = nullptr);

/// One online update step: shifts all k pairs, re-sorts ascending, re-D-
/// orthonormalizes against the new D, and reports per-pair diagnostics in
/// pre-update pair order. Throws RefreshRequired when more than k/2 pairs
/// hit the small-gap guard or the updated basis degenerates.
std::pair<SpectralState, PerturbReport> update_state(const SpectralState& state,
                                                     const LaplacianDelta& delta,
                                                     LaplacianPair newLap,
                                                     const PerturbOptions& options = {});

} // namespace dyne
