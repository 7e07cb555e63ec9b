#include "dyne/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dyne {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Both the full build and the incremental update must produce bit-identical
// entries for the same attribute rows, so they share this kernel: dense
// row-normalized attributes and a fixed-order dot product.
RowMat normalized_rows(const SpMat& attributes) {
    RowMat rows = RowMat(attributes);
    if (!rows.allFinite())
        throw Error("attributes contain non-finite values");
    for (Index i = 0; i < rows.rows(); ++i) {
        const double norm = rows.row(i).norm();
        if (norm > 0.0)
            rows.row(i) /= norm;
    }
    return rows;
}

double cosine_of(const RowMat& rows, Index i, Index j) {
    const double c = rows.row(i).dot(rows.row(j));
    return c > 1.0 ? 1.0 : c;
}

SpMat sparsify_rows(const SpMat& w, int keep) {
    const Index n = w.rows();
    // Union of per-row top-keep entries; W is symmetric, so keeping (i,j)
    // from either side and copying the shared value symmetrizes by max.
    std::vector<std::vector<Index>> kept(n);
    std::vector<std::pair<double, Index>> row;
    for (Index i = 0; i < n; ++i) {
        row.clear();
        for (SpMat::InnerIterator it(w, i); it; ++it)
            row.emplace_back(it.value(), it.row());
        const auto cmp = [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        };
        if (static_cast<int>(row.size()) > keep) {
            std::partial_sort(row.begin(), row.begin() + keep, row.end(), cmp);
            row.resize(keep);
        }
        for (const auto& [v, j] : row)
            kept[i].push_back(j);
    }
    std::vector<Triplet> trip;
    for (Index i = 0; i < n; ++i)
        for (Index j : kept[i]) {
            const double v = w.coeff(i, j);
            trip.emplace_back(i, j, v);
            trip.emplace_back(j, i, v);
        }
    SpMat out(n, n);
    // duplicates carry the same value; collapse keeping one copy
    out.setFromTriplets(trip.begin(), trip.end(), [](double x, double) { return x; });
    out.makeCompressed();
    return out;
}

} // namespace

SimilarityGraph build_similarity(const Snapshot& snapshot, std::optional<int> sparsify_top) {
    if (snapshot.d == 0)
        throw Error("no attributes");
    if (sparsify_top && *sparsify_top <= 0)
        throw Error("sparsify_top must be positive");

    const Index n = snapshot.n;
    const RowMat rows = normalized_rows(snapshot.attributes);

    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(n) * 8);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            const double c = cosine_of(rows, i, j);
            if (c != 0.0) {
                trip.emplace_back(i, j, c);
                trip.emplace_back(j, i, c);
            }
        }

    SimilarityGraph g;
    g.w.resize(n, n);
    g.w.setFromTriplets(trip.begin(), trip.end());
    g.w.makeCompressed();
    if (sparsify_top)
        g.w = sparsify_rows(g.w, *sparsify_top);
    return g;
}

SimilarityUpdate update_similarity(const SimilarityGraph& old,
                                   const Snapshot& newSnap,
                                   const std::vector<Index>& touched) {
    if (newSnap.d == 0)
        throw Error("no attributes");
    const Index n = newSnap.n;
    if (old.w.rows() != n)
        throw Error("similarity graph size does not match snapshot");

    SimilarityUpdate out;
    out.delta.resize(n, n);
    if (touched.empty()) {
        out.graph = old;
        out.delta.makeCompressed();
        return out;
    }

    const RowMat rows = normalized_rows(newSnap.attributes);
    std::vector<char> is_touched(n, 0);
    std::vector<int> slot_of(n, -1);
    for (std::size_t s = 0; s < touched.size(); ++s) {
        is_touched[touched[s]] = 1;
        slot_of[touched[s]] = static_cast<int>(s);
    }

    // recomputed similarity rows for every touched node (zero at the node)
    Mat fresh(touched.size(), n);
    for (std::size_t s = 0; s < touched.size(); ++s) {
        const Index t = touched[s];
        for (Index j = 0; j < n; ++j)
            fresh(static_cast<Index>(s), j) = j == t ? 0.0 : cosine_of(rows, t, j);
    }

    // deltas of the touched rows/columns against the old matrix
    std::vector<Triplet> tripDelta;
    Vec oldRow(n);
    for (std::size_t s = 0; s < touched.size(); ++s) {
        const Index t = touched[s];
        oldRow.setZero();
        for (SpMat::InnerIterator it(old.w, t); it; ++it)
            oldRow[it.row()] = it.value();
        for (Index j = 0; j < n; ++j) {
            if (j == t || (is_touched[j] && j < t)) continue;
            const double d = fresh(static_cast<Index>(s), j) - oldRow[j];
            if (d != 0.0) {
                tripDelta.emplace_back(t, j, d);
                tripDelta.emplace_back(j, t, d);
            }
        }
    }
    out.delta.setFromTriplets(tripDelta.begin(), tripDelta.end());
    out.delta.makeCompressed();

    // direct column-ordered assembly of the new matrix: touched columns are
    // rebuilt outright, untouched ones merge carried-over entries with the
    // recomputed touched rows
    using Storage = SpMat::StorageIndex;
    std::vector<Storage> outer(n + 1);
    std::vector<Storage> innerIdx;
    std::vector<double> values;
    const std::size_t guess =
        old.w.nonZeros() + 2 * touched.size() * static_cast<std::size_t>(n);
    innerIdx.reserve(guess);
    values.reserve(guess);
    for (Index col = 0; col < n; ++col) {
        outer[col] = static_cast<Storage>(innerIdx.size());
        if (is_touched[col]) {
            const Index s = slot_of[col];
            for (Index r = 0; r < n; ++r)
                if (fresh(s, r) != 0.0) {
                    innerIdx.push_back(static_cast<Storage>(r));
                    values.push_back(fresh(s, r));
                }
            continue;
        }
        SpMat::InnerIterator it(old.w, col);
        std::size_t s = 0;
        auto skip_zero_touched = [&] {
            while (s < touched.size() && fresh(static_cast<Index>(s), col) == 0.0)
                ++s;
        };
        skip_zero_touched();
        while (it || s < touched.size()) {
            if (it && is_touched[it.row()]) {
                ++it; // replaced by the recomputed value
                continue;
            }
            const Index oldRowIdx = it ? it.row() : n;
            const Index touchedRow = s < touched.size() ? touched[s] : n;
            if (oldRowIdx < touchedRow) {
                innerIdx.push_back(static_cast<Storage>(oldRowIdx));
                values.push_back(it.value());
                ++it;
            } else {
                innerIdx.push_back(static_cast<Storage>(touchedRow));
                values.push_back(fresh(static_cast<Index>(s), col));
                ++s;
                skip_zero_touched();
            }
        }
    }
    outer[n] = static_cast<Storage>(innerIdx.size());
    out.graph.w = Eigen::Map<const SpMat>(n, n, static_cast<Index>(innerIdx.size()),
                                          outer.data(), innerIdx.data(), values.data());
    return out;
}

} // namespace dyne
