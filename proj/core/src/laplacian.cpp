#include "dyne/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dyne {

namespace {

using Storage = SpMat::StorageIndex;

// Direct CSC assembly of diag(deg) - base: column-by-column merge of the
// base entries with the diagonal slot, no triplet sort.
LaplacianPair assemble_laplacian(const SpMat& base) {
    const Index n = base.rows();
    Vec degrees = Vec::Zero(n);
    for (Index col = 0; col < n; ++col)
        for (SpMat::InnerIterator it(base, col); it; ++it)
            degrees[it.row()] += it.value();

    std::vector<Storage> outer(n + 1);
    std::vector<Storage> inner;
    std::vector<double> values;
    inner.reserve(base.nonZeros() + n);
    values.reserve(base.nonZeros() + n);
    for (Index col = 0; col < n; ++col) {
        outer[col] = static_cast<Storage>(inner.size());
        SpMat::InnerIterator it(base, col);
        bool diagDone = false;
        for (; it; ++it) {
            if (!diagDone && it.row() > col) {
                inner.push_back(static_cast<Storage>(col));
                values.push_back(degrees[col]);
                diagDone = true;
            }
            if (it.row() == col)
                continue; // zero diagonal in the base
            inner.push_back(static_cast<Storage>(it.row()));
            values.push_back(-it.value());
        }
        if (!diagDone) {
            inner.push_back(static_cast<Storage>(col));
            values.push_back(degrees[col]);
        }
    }
    outer[n] = static_cast<Storage>(inner.size());

    LaplacianPair pair;
    pair.laplacian = Eigen::Map<const SpMat>(n, n, static_cast<Index>(inner.size()),
                                             outer.data(), inner.data(), values.data());
    pair.degrees = std::move(degrees);
    return pair;
}

} // namespace

LaplacianPair build_laplacian(const SpMat& base) {
    if (base.rows() != base.cols())
        throw Error("laplacian base must be square");
    const Index n = base.rows();

    SpMat t = SpMat(base.transpose());
    for (Index col = 0; col < n; ++col) {
        SpMat::InnerIterator a(base, col);
        SpMat::InnerIterator b(t, col);
        for (; a || b; ++a, ++b) {
            const double va = a ? a.value() : 0.0;
            const double vb = b ? b.value() : 0.0;
            const Index ra = a ? a.row() : (b ? b.row() : 0);
            const Index rb = b ? b.row() : ra;
            if (ra != rb || std::abs(va - vb) > 1e-12)
                throw Error("laplacian base asymmetric beyond 1e-12");
        }
    }

    for (Index col = 0; col < n; ++col)
        for (SpMat::InnerIterator it(base, col); it; ++it) {
            if (!std::isfinite(it.value()) || it.value() < 0.0)
                throw Error("laplacian base entries must be finite and non-negative");
            if (it.row() == it.col() && it.value() != 0.0)
                throw Error("laplacian base must have a zero diagonal");
        }

    return assemble_laplacian(base);
}

LaplacianPair laplacian_from_symmetric(const SpMat& base) {
    if (base.rows() != base.cols())
        throw Error("laplacian base must be square");
    const Index n = base.rows();

    // with no stored diagonal entries, L's column c is exactly base's column
    // plus one diagonal slot, so the output layout is known upfront
    for (Index col = 0; col < n; ++col) {
        const Storage* begin = base.innerIndexPtr() + base.outerIndexPtr()[col];
        const Storage* end = base.innerIndexPtr() + base.outerIndexPtr()[col + 1];
        if (std::binary_search(begin, end, static_cast<Storage>(col)))
            return assemble_laplacian(base); // explicit diagonal: take the general path
    }

    LaplacianPair pair;
    pair.degrees.resize(n);
    pair.laplacian.resize(n, n);
    pair.laplacian.makeCompressed();
    pair.laplacian.resizeNonZeros(base.nonZeros() + n);

    Storage* outer = pair.laplacian.outerIndexPtr();
    Storage* inner = pair.laplacian.innerIndexPtr();
    double* values = pair.laplacian.valuePtr();

    // for a symmetric matrix the column sum equals the row sum, entry for
    // entry, so degrees can be produced in the same pass
    Index at = 0;
    for (Index col = 0; col < n; ++col) {
        outer[col] = static_cast<Storage>(at);
        double deg = 0.0;
        for (SpMat::InnerIterator it(base, col); it; ++it)
            deg += it.value();
        pair.degrees[col] = deg;

        SpMat::InnerIterator it(base, col);
        for (; it && it.row() < col; ++it) {
            inner[at] = static_cast<Storage>(it.row());
            values[at++] = -it.value();
        }
        inner[at] = static_cast<Storage>(col);
        values[at++] = deg;
        for (; it; ++it) {
            inner[at] = static_cast<Storage>(it.row());
            values[at++] = -it.value();
        }
    }
    outer[n] = static_cast<Storage>(at);
    return pair;
}

LaplacianDelta delta_laplacian(const LaplacianPair& oldPair, const LaplacianPair& newPair) {
    const Index n = oldPair.size();
    if (newPair.size() != n)
        throw Error("laplacian pair shapes do not match");

    LaplacianDelta out;
    out.degrees.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double d = newPair.degrees[i] - oldPair.degrees[i];
        if (d != 0.0)
            out.degrees.insertBack(i) = d;
    }

    std::vector<Triplet> trip;
    for (Index col = 0; col < n; ++col) {
        SpMat::InnerIterator a(oldPair.laplacian, col);
        SpMat::InnerIterator b(newPair.laplacian, col);
        while (a || b) {
            if (a && (!b || a.row() < b.row())) {
                trip.emplace_back(a.row(), col, -a.value());
                ++a;
            } else if (b && (!a || b.row() < a.row())) {
                trip.emplace_back(b.row(), col, b.value());
                ++b;
            } else {
                const double d = b.value() - a.value();
                if (d != 0.0)
                    trip.emplace_back(a.row(), col, d);
                ++a;
                ++b;
            }
        }
    }
    out.laplacian.resize(n, n);
    out.laplacian.setFromTriplets(trip.begin(), trip.end());
    out.laplacian.makeCompressed();
    return out;
}

LaplacianDelta laplacian_delta_from_base_change(const SpMat& baseDelta) {
    const Index n = baseDelta.rows();
    if (baseDelta.cols() != n)
        throw Error("base delta must be square");

    Vec rowSums = Vec::Zero(n);
    for (Index col = 0; col < n; ++col)
        for (SpMat::InnerIterator it(baseDelta, col); it; ++it)
            rowSums[it.row()] += it.value();

    LaplacianDelta out;
    out.degrees.resize(n);
    for (Index i = 0; i < n; ++i)
        if (rowSums[i] != 0.0)
            out.degrees.insertBack(i) = rowSums[i];

    out.laplacian.resize(n, n);
    out.laplacian.reserve(baseDelta.nonZeros() + out.degrees.nonZeros());
    for (Index col = 0; col < n; ++col) {
        out.laplacian.startVec(col);
        SpMat::InnerIterator it(baseDelta, col);
        bool diagDone = false;
        for (; it; ++it) {
            if (!diagDone && it.row() > col) {
                if (rowSums[col] != 0.0)
                    out.laplacian.insertBack(col, col) = rowSums[col];
                diagDone = true;
            }
            if (it.row() == col)
                continue;
            out.laplacian.insertBack(it.row(), col) = -it.value();
        }
        if (!diagDone && rowSums[col] != 0.0)
            out.laplacian.insertBack(col, col) = rowSums[col];
    }
    out.laplacian.finalize();
    out.laplacian.makeCompressed();
    return out;
}

LaplacianPair floor_degrees(LaplacianPair pair, double eps) {
    for (Index i = 0; i < pair.degrees.size(); ++i)
        pair.degrees[i] = std::max(pair.degrees[i], eps);
    return pair;
}

Index count_zero_degrees(const LaplacianPair& pair, double eps) {
    Index c = 0;
    for (Index i = 0; i < pair.degrees.size(); ++i)
        if (pair.degrees[i] < eps)
            ++c;
    return c;
}

} // namespace dyne
