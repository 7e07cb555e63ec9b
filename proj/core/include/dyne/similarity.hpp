#pragma once

#include "dyne/snapshot.hpp"
#include "dyne/types.hpp"

#include <optional>
#include <vector>

namespace dyne {

/// Pairwise cosine similarity of attribute rows: symmetric, zero diagonal,
/// entries in [0, 1] for non-negative attributes.
struct SimilarityGraph {
    SpMat w;

    DYNE_MOVE_BY_SWAP(SimilarityGraph)
    void swap(SimilarityGraph& other) noexcept { w.swap(other.w); }
};

/// W(i,j) = cos(X(i,:), X(j,:)) for i != j; rows with all-zero attributes get
/// an all-zero similarity row. If sparsify_top = s is given, only the s
/// largest entries per row are kept and the result is symmetrized by max.
/// Throws Error when d = 0 or any attribute value is non-finite.
SimilarityGraph build_similarity(const Snapshot& snapshot,
                                 std::optional<int> sparsify_top = std::nullopt);

struct SimilarityUpdate {
    SimilarityGraph graph; // similarity of the new snapshot
    SpMat delta;           // graph.w - old.w, sparse

    DYNE_MOVE_BY_SWAP(SimilarityUpdate)
    void swap(SimilarityUpdate& other) noexcept {
        graph.swap(other.graph);
        delta.swap(other.delta);
    }
};

/// Incremental similarity maintenance: rows listed in touched are recomputed
/// against all columns (and symmetrically), everything else is carried over
/// unchanged. The result is entrywise identical to build_similarity(newSnap)
/// without sparsification -- both paths share the same cosine kernel.
/// touched must name every row where newSnap.attributes differs from
/// oldSnap.attributes.
SimilarityUpdate update_similarity(const SimilarityGraph& old,
                                   const Snapshot& newSnap,
                                   const std::vector<Index>& touched);

} // namespace dyne
