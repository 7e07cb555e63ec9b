#include "dyne/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dyne {

namespace {

double quad_sparse(const SpMat& m, const Vec& x, const Vec& y) {
    double s = 0.0;
    for (Index col = 0; col < m.outerSize(); ++col)
        for (SpMat::InnerIterator it(m, col); it; ++it)
            s += x[it.row()] * it.value() * y[col];
    return s;
}

double quad_diag(const SpVec& d, const Vec& x, const Vec& y) {
    double s = 0.0;
    for (SpVec::InnerIterator it(d); it; ++it)
        s += x[it.index()] * it.value() * y[it.index()];
    return s;
}

void check_dims(const EigenPair& pair, const LaplacianDelta& delta) {
    if (delta.laplacian.rows() != pair.vector.size() ||
        delta.degrees.size() != pair.vector.size())
        throw Error("perturbation dimensions do not match the eigen-pair");
}

// z_i = dL a_i - lambda_i dD a_i; every alpha numerator is a dot with z_i.
Vec shift_vector(const EigenPair& pair, const LaplacianDelta& delta) {
    Vec z = delta.laplacian * pair.vector;
    for (SpVec::InnerIterator it(delta.degrees); it; ++it)
        z[it.index()] -= pair.value * it.value() * pair.vector[it.index()];
    return z;
}

} // namespace

double PerturbReport::max_residual() const {
    double worst = 0.0;
    for (const auto& p : pairs)
        worst = std::max(worst, p.residual);
    return worst;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ||L a_i - lambda_i D a_i|| for every pair in one pass over L; the
// near-dense attribute Laplacian makes per-pair matrix-vector products the
// dominant online cost otherwise.
std::vector<double> block_residuals(const std::vector<EigenPair>& pairs,
                                    const LaplacianPair& lap) {
    const Index n = lap.size();
    const Index k = static_cast<Index>(pairs.size());
    RowMajor vecs(n, k);
    for (Index j = 0; j < k; ++j)
        vecs.col(j) = pairs[j].vector;
    RowMajor acc = RowMajor::Zero(n, k);
    for (Index col = 0; col < n; ++col) {
        const double* src = vecs.data() + col * k;
        for (SpMat::InnerIterator it(lap.laplacian, col); it; ++it) {
            double* dst = acc.data() + it.row() * k;
            const double v = it.value();
            for (Index c = 0; c < k; ++c)
                dst[c] += v * src[c];
        }
    }
    std::vector<double> out(pairs.size());
    for (Index j = 0; j < k; ++j)
        out[j] = (acc.col(j) -
                  pairs[j].value * lap.degrees.cwiseProduct(pairs[j].vector))
                     .norm();
    return out;
}

} // namespace

double delta_eigenvalue(const EigenPair& pair, const LaplacianDelta& delta) {
    check_dims(pair, delta);
    return quad_sparse(delta.laplacian, pair.vector, pair.vector) -
           pair.value * quad_diag(delta.degrees, pair.vector, pair.vector);
}

double delta_eigenvalue(const EigenPair& pair, const LaplacianDelta& delta, const Vec& degrees) {
    check_dims(pair, delta);
    if (degrees.size() != pair.vector.size())
        throw Error("degree vector size does not match the eigen-pair");
    const double denom = pair.vector.cwiseProduct(degrees).dot(pair.vector);
    if (std::abs(denom) < 1e-300)
        throw NumericError("eigen-pair has zero D-norm");
    return delta_eigenvalue(pair, delta) / denom;
}

double default_gap_tol(const SpectralState& state, double scale) {
    if (state.pairs.empty())
        throw Error("spectral state has no eigen-pairs");
    return scale * std::max(1.0, state.pairs.back().value);
}

std::pair<Vec, Vec> delta_eigenvector(const SpectralState& state, int i,
                                      const LaplacianDelta& delta, double gap_tol,
                                      bool* flagged) {
    const int k = static_cast<int>(state.pairs.size());
    if (i < 0 || i >= k)
        throw Error("pair index out of range");
    if (gap_tol < 0.0)
        gap_tol = default_gap_tol(state);

    const EigenPair& pair = state.pairs[i];
    check_dims(pair, delta);
    const Vec z = shift_vector(pair, delta);

    Vec alpha = Vec::Zero(k);
    bool hit = false;
    for (int p = 0; p < k; ++p) {
        if (p == i) {
            alpha[p] = -0.5 * quad_diag(delta.degrees, pair.vector, pair.vector);
            continue;
        }
        const double gap = pair.value - state.pairs[p].value;
        if (std::abs(gap) < gap_tol) {
            hit = true;
            continue;
        }
        alpha[p] = state.pairs[p].vector.dot(z) / gap;
    }
    if (flagged)
        *flagged = hit;

    Vec shift = Vec::Zero(pair.vector.size());
    for (int p = 0; p < k; ++p)
        if (alpha[p] != 0.0)
            shift += alpha[p] * state.pairs[p].vector;
    return {std::move(shift), std::move(alpha)};
}

std::pair<SpectralState, PerturbReport> update_state(const SpectralState& state,
                                                     const LaplacianDelta& delta,
                                                     LaplacianPair newLap,
                                                     const PerturbOptions& options) {
    const int k = static_cast<int>(state.pairs.size());
    if (k == 0)
        throw Error("spectral state has no eigen-pairs");
    if (newLap.size() != state.lap.size())
        throw Error("new laplacian size does not match the state");

    PerturbReport report;
    report.pairs.resize(k);
    report.alpha = Mat::Zero(k, k);

    SpectralState out;
    out.k = state.k;
    out.stats = state.stats;

    if (delta.empty()) {
        // nothing to do; keep pairs bit-identical, just swap in the new system
        out.pairs = state.pairs;
        out.lap = std::move(newLap);
        const auto residuals = block_residuals(out.pairs, out.lap);
        for (int i = 0; i < k; ++i) {
            report.pairs[i].gap_margin = std::numeric_limits<double>::infinity();
            report.pairs[i].residual = residuals[i];
        }
        return {std::move(out), std::move(report)};
    }

    const double gapTol = default_gap_tol(state, options.gap_tol_scale);

    std::vector<EigenPair> updated(k);
    for (int i = 0; i < k; ++i) {
        bool hit = false;
        auto [shift, alpha] = delta_eigenvector(state, i, delta, gapTol, &hit);
        const double dval = delta_eigenvalue(state.pairs[i], delta);

        updated[i].value = state.pairs[i].value + dval;
        updated[i].vector = state.pairs[i].vector + shift;

        double margin = std::numeric_limits<double>::infinity();
        for (int p = 0; p < k; ++p)
            if (p != i)
                margin = std::min(margin, std::abs(state.pairs[i].value - state.pairs[p].value));

        report.alpha.row(i) = alpha.transpose();
        report.pairs[i].delta_value = dval;
        report.pairs[i].delta_vector_norm = shift.norm();
        report.pairs[i].gap_margin = margin;
        report.pairs[i].flagged = hit;
        if (hit)
            ++report.flagged_count;
    }

    if (report.flagged_count > k / 2)
        throw RefreshRequired("refresh required: " + std::to_string(report.flagged_count) +
                              " of " + std::to_string(k) + " pairs hit the small-gap guard");

    // re-sort ascending; stable to keep vector-value association on ties
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return updated[a].value < updated[b].value; });

    out.lap = std::move(newLap);
    out.pairs.reserve(k);
    for (int pos = 0; pos < k; ++pos)
        out.pairs.push_back(std::move(updated[order[pos]]));

    try {
        out = reorthonormalize(std::move(out));
    } catch (const NumericError&) {
        throw RefreshRequired("refresh required: degenerate basis after update");
    }

    const auto residuals = block_residuals(out.pairs, out.lap);
    for (int pos = 0; pos < k; ++pos)
        report.pairs[order[pos]].residual = residuals[pos];
    return {std::move(out), std::move(report)};
}

} // namespace dyne
