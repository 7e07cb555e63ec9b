#pragma once

#include "dyne/laplacian.hpp"
#include "dyne/types.hpp"

#include <cstdint>
#include <vector>

namespace dyne {

/// One generalized eigen-pair of L a = lambda D a, normalized a' D a = 1.
struct EigenPair {
    double value = 0.0;
    Vec vector;
};

struct SolveStats {
    Index near_zero = 0;    // returned eigenvalues below the zero threshold
                            // (extra connected components show up here)
    Index floored = 0;      // degrees at or below the floor when solving
    int restarts = 0;
    int iterations = 0;
    double max_residual = 0.0; // max ||L a - lambda D a||_2 over returned pairs
};

/// Top-k smallest nontrivial eigen-pairs of one source (network or
/// attribute similarity), D-orthonormal, ascending. The trivial pair
/// (constant vector, lambda = 0) is deflated away and never returned.
struct SpectralState {
    std::vector<EigenPair> pairs;
    LaplacianPair lap;
    int k = 0;
    SolveStats stats;
};

/// Solves L a = lambda D a for the k smallest nontrivial pairs via
/// shift-invert Lanczos on the symmetrized operator D^-1/2 L D^-1/2 with the
/// known trivial eigenvector deflated. Deterministic for a fixed seed.
/// Throws Error when k + 1 > n or when a degree is zero (callers with
/// isolated nodes must apply floor_degrees first), NumericError on
/// non-convergence.
SpectralState solve_topk(const LaplacianPair& lapPair, int k, std::uint64_t seed);

/// Column j = eigenvector j (ascending eigenvalue), n x k.
Mat embedding_matrix(const SpectralState& state);

/// Gram-Schmidt under the D-inner-product, preserving order, followed by
/// sign canonicalization (largest-magnitude entry positive). Idempotent.
/// Throws NumericError("degenerate basis") when a vector's D-norm falls
/// below 1e-12 after projection.
SpectralState reorthonormalize(SpectralState state);

/// Flips the vector's sign in place so its largest-magnitude entry is
/// positive (first such entry on ties).
void canonicalize_sign(Vec& v);

/// max |a_i' D a_j - delta_ij| over all pairs; diagnostic used by tests and
/// the refresh policy.
double orthonormality_defect(const SpectralState& state);

} // namespace dyne
