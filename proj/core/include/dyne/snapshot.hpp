#pragma once

#include "dyne/types.hpp"

#include <utility>
#include <vector>

namespace dyne {

/// One time step of an attributed network: an undirected weighted graph on
/// n nodes plus a non-negative n x d attribute matrix. Immutable after
/// construction and safe to share across threads.
struct Snapshot {
    Index n = 0;
    Index d = 0;
    SpMat adjacency;  // n x n, symmetric, zero diagonal, weights >= 0
    SpMat attributes; // n x d, entries >= 0

    DYNE_MOVE_BY_SWAP(Snapshot)
    void swap(Snapshot& other) noexcept {
        std::swap(n, other.n);
        std::swap(d, other.d);
        adjacency.swap(other.adjacency);
        attributes.swap(other.attributes);
    }

    /// Validates the invariants (exact symmetry, zero diagonal, finite
    /// non-negative weights) and returns a compressed snapshot.
    static Snapshot make(SpMat adjacency, SpMat attributes);
};

/// Sparse change between two consecutive snapshots. Entries may be negative
/// as long as applying them to the base snapshot keeps all values >= 0.
struct Delta {
    SpMat adj;  // n x n, symmetric, zero diagonal
    SpMat attr; // n x d

    DYNE_MOVE_BY_SWAP(Delta)
    void swap(Delta& other) noexcept {
        adj.swap(other.adj);
        attr.swap(other.attr);
    }

    static Delta make(SpMat adj, SpMat attr);

    bool empty() const { return adj.nonZeros() == 0 && attr.nonZeros() == 0; }
};

/// Returns the advanced snapshot: adjacency + delta.adj, attributes +
/// delta.attr, with exact zeros pruned. Throws Error naming the offending
/// entry if any resulting value is negative.
Snapshot apply_delta(const Snapshot& snapshot, const Delta& delta);

/// Row indices with at least one attribute change, ascending, unique.
std::vector<Index> touched_attribute_rows(const Delta& delta);

/// Drops explicit zeros and compresses; used to put sparse matrices in the
/// canonical form that equality tests rely on.
SpMat canonical(const SpMat& m);

} // namespace dyne
