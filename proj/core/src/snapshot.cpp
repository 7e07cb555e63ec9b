#include "dyne/snapshot.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace dyne {

namespace {

std::string entry_name(const char* what, Index i, Index j, double v) {
    std::ostringstream os;
    os << what << "(" << i << "," << j << ") = " << v;
    return os.str();
}

void check_symmetric_exact(const SpMat& m, const char* what) {
    SpMat t = SpMat(m.transpose());
    for (Index col = 0; col < m.outerSize(); ++col) {
        SpMat::InnerIterator a(m, col);
        SpMat::InnerIterator b(t, col);
        for (; a || b; ++a, ++b) {
            if (!a || !b || a.row() != b.row() || a.value() != b.value())
                throw Error(std::string(what) + " is not symmetric");
        }
    }
}

void check_zero_diagonal(const SpMat& m, const char* what) {
    for (Index col = 0; col < m.outerSize(); ++col)
        for (SpMat::InnerIterator it(m, col); it; ++it)
            if (it.row() == it.col() && it.value() != 0.0)
                throw Error(std::string(what) + " has a nonzero diagonal entry at " +
                            std::to_string(it.row()));
}

void check_finite(const SpMat& m, const char* what, bool require_nonneg) {
    for (Index col = 0; col < m.outerSize(); ++col)
        for (SpMat::InnerIterator it(m, col); it; ++it) {
            if (!std::isfinite(it.value()))
                throw Error(entry_name(what, it.row(), it.col(), it.value()) + " is not finite");
            if (require_nonneg && it.value() < 0.0)
                throw Error(entry_name(what, it.row(), it.col(), it.value()) + " is negative");
        }
}

} // namespace

SpMat canonical(const SpMat& m) {
    SpMat out = m.pruned(0.0, 0.0);
    out.makeCompressed();
    return out;
}

Snapshot Snapshot::make(SpMat adjacency, SpMat attributes) {
    if (adjacency.rows() != adjacency.cols())
        throw Error("adjacency must be square");
    if (attributes.rows() != adjacency.rows())
        throw Error("attributes row count must equal node count");
    adjacency = canonical(adjacency);
    attributes = canonical(attributes);
    check_symmetric_exact(adjacency, "adjacency");
    check_zero_diagonal(adjacency, "adjacency");
    check_finite(adjacency, "adjacency", /*require_nonneg=*/true);
    check_finite(attributes, "attributes", /*require_nonneg=*/true);
    Snapshot s;
    s.n = adjacency.rows();
    s.d = attributes.cols();
    s.adjacency = std::move(adjacency);
    s.attributes = std::move(attributes);
    return s;
}

Delta Delta::make(SpMat adj, SpMat attr) {
    if (adj.rows() != adj.cols())
        throw Error("delta adjacency must be square");
    if (attr.rows() != adj.rows())
        throw Error("delta attribute row count must equal node count");
    adj = canonical(adj);
    attr = canonical(attr);
    check_symmetric_exact(adj, "delta adjacency");
    check_zero_diagonal(adj, "delta adjacency");
    check_finite(adj, "delta adjacency", /*require_nonneg=*/false);
    check_finite(attr, "delta attributes", /*require_nonneg=*/false);
    Delta d;
    d.adj = std::move(adj);
    d.attr = std::move(attr);
    return d;
}

namespace {

SpMat add_checked(const SpMat& base, const SpMat& delta, const char* what) {
    SpMat sum = base + delta;
    for (Index col = 0; col < sum.outerSize(); ++col)
        for (SpMat::InnerIterator it(sum, col); it; ++it)
            if (it.value() < 0.0)
                throw Error("applying delta yields negative " +
                            entry_name(what, it.row(), it.col(), it.value()));
    return canonical(sum);
}

} // namespace

Snapshot apply_delta(const Snapshot& snapshot, const Delta& delta) {
    if (delta.adj.rows() != snapshot.n || delta.attr.rows() != snapshot.n ||
        delta.attr.cols() != snapshot.d)
        throw Error("delta dimensions do not match snapshot");
    Snapshot out;
    out.n = snapshot.n;
    out.d = snapshot.d;
    out.adjacency = delta.adj.nonZeros() == 0 ? snapshot.adjacency
                                              : add_checked(snapshot.adjacency, delta.adj, "adjacency");
    out.attributes = delta.attr.nonZeros() == 0
                         ? snapshot.attributes
                         : add_checked(snapshot.attributes, delta.attr, "attributes");
    return out;
}

std::vector<Index> touched_attribute_rows(const Delta& delta) {
    std::set<Index> rows;
    for (Index col = 0; col < delta.attr.outerSize(); ++col)
        for (SpMat::InnerIterator it(delta.attr, col); it; ++it)
            rows.insert(it.row());
    return {rows.begin(), rows.end()};
}

} // namespace dyne
