#pragma once

#include "dyne/types.hpp"

namespace dyne {

/// Degree diagonal and unnormalized Laplacian of a symmetric non-negative
/// base matrix: deg(i) = sum_j base(i,j), lap = diag(deg) - base.
/// lap keeps an explicit diagonal entry for every row.
struct LaplacianPair {
    Vec degrees;
    SpMat laplacian;

    DYNE_MOVE_BY_SWAP(LaplacianPair)
    void swap(LaplacianPair& other) noexcept {
        degrees.swap(other.degrees);
        laplacian.swap(other.laplacian);
    }

    Index size() const { return degrees.size(); }
};

/// Sparse difference of two LaplacianPairs; only entries that actually
/// changed are stored.
struct LaplacianDelta {
    SpVec degrees;  // diagonal of the degree change
    SpMat laplacian;

    DYNE_MOVE_BY_SWAP(LaplacianDelta)
    void swap(LaplacianDelta& other) noexcept {
        degrees.swap(other.degrees);
        laplacian.swap(other.laplacian);
    }

    bool empty() const { return degrees.nonZeros() == 0 && laplacian.nonZeros() == 0; }
};

/// Builds the (degree, Laplacian) pair. Throws Error if the base matrix is
/// asymmetric beyond 1e-12, has a nonzero diagonal, or has negative or
/// non-finite entries.
LaplacianPair build_laplacian(const SpMat& base);

/// Same output as build_laplacian, skipping validation. For callers that
/// already hold a symmetric, zero-diagonal, non-negative matrix (similarity
/// graphs maintained by the pipeline); entries and structure are identical
/// to the checked build.
LaplacianPair laplacian_from_symmetric(const SpMat& base);

/// Entrywise difference new - old, stored sparse.
LaplacianDelta delta_laplacian(const LaplacianPair& oldPair, const LaplacianPair& newPair);

/// Laplacian delta induced by a sparse symmetric change of the base matrix:
/// dDeg = row sums of baseDelta, dLap = diag(dDeg) - baseDelta. Cost
/// O(nnz(baseDelta)), independent of the full matrix size.
LaplacianDelta laplacian_delta_from_base_change(const SpMat& baseDelta);

/// Returns the pair with degrees floored at eps. Keeps the Laplacian as-is,
/// so lap * 1 = 0 still holds; the generalized eigen-problem just sees a
/// nonsingular diagonal. Needed before solving when isolated nodes exist.
LaplacianPair floor_degrees(LaplacianPair pair, double eps = 1e-8);

/// Number of entries strictly below eps (how many nodes flooring would touch).
Index count_zero_degrees(const LaplacianPair& pair, double eps = 1e-8);

} // namespace dyne
