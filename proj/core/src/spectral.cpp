#include "dyne/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace dyne {

namespace {

constexpr double kRitzTol = 1e-10; // convergence tolerance on Ritz residuals
constexpr double kDegreeFloor = 1e-8;

// Applies K^-1 for K = D^-1/2 L D^-1/2 + sigma I. Sparse Cholesky for the
// usual sparse case; dense Cholesky when the pattern is dense enough that
// fill-in would dominate (attribute similarity graphs are near-dense).
class ShiftedSolver {
public:
    explicit ShiftedSolver(const SpMat& K) {
        const double density =
            static_cast<double>(K.nonZeros()) / (static_cast<double>(K.rows()) * K.cols());
        dense_ = density > 0.15;
        if (dense_) {
            llt_.compute(Mat(K));
            if (llt_.info() != Eigen::Success)
                throw NumericError("shifted operator: dense factorization failed");
        } else {
            ldlt_.compute(K);
            if (ldlt_.info() != Eigen::Success)
                throw NumericError("shifted operator: sparse factorization failed");
        }
    }

    Vec solve(const Vec& b) const {
        if (dense_)
            return llt_.solve(b);
        return ldlt_.solve(b);
    }

private:
    bool dense_ = false;
    Eigen::LLT<Mat> llt_;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
};

double d_inner(const Vec& degrees, const Vec& x, const Vec& y) {
    return x.cwiseProduct(degrees).dot(y);
}

} // namespace

void canonicalize_sign(Vec& v) {
    Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (v[at] < 0.0)
        v = -v;
}

Mat embedding_matrix(const SpectralState& state) {
    if (state.pairs.empty())
        throw Error("spectral state has no eigen-pairs");
    const Index n = state.pairs.front().vector.size();
    Mat y(n, static_cast<Index>(state.pairs.size()));
    for (std::size_t j = 0; j < state.pairs.size(); ++j)
        y.col(static_cast<Index>(j)) = state.pairs[j].vector;
    return y;
}

SpectralState reorthonormalize(SpectralState state) {
    const Vec& deg = state.lap.degrees;
    for (std::size_t i = 0; i < state.pairs.size(); ++i) {
        Vec& v = state.pairs[i].vector;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < i; ++j) {
                const Vec& prev = state.pairs[j].vector;
                v -= d_inner(deg, prev, v) * prev;
            }
        const double norm = std::sqrt(std::max(0.0, d_inner(deg, v, v)));
        if (norm < 1e-12)
            throw NumericError("degenerate basis");
        v /= norm;
        canonicalize_sign(v);
    }
    return state;
}

double orthonormality_defect(const SpectralState& state) {
    double worst = 0.0;
    for (std::size_t i = 0; i < state.pairs.size(); ++i)
        for (std::size_t j = i; j < state.pairs.size(); ++j) {
            const double g =
                d_inner(state.lap.degrees, state.pairs[i].vector, state.pairs[j].vector);
            worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

SpectralState solve_topk(const LaplacianPair& lapPair, int k, std::uint64_t seed) {
    const Index n = lapPair.size();
    if (k < 1)
        throw Error("k must be positive");
    if (static_cast<Index>(k) + 1 > n)
        throw Error("k + 1 = " + std::to_string(k + 1) + " eigen-pairs exceed n = " +
                    std::to_string(n));
    for (Index i = 0; i < n; ++i)
        if (lapPair.degrees[i] <= 0.0)
            throw Error("zero-degree node " + std::to_string(i) +
                        "; apply floor_degrees() before solving");

    const Vec dsqrt = lapPair.degrees.cwiseSqrt();
    const Vec dinv = dsqrt.cwiseInverse();

    // K = D^-1/2 L D^-1/2 + sigma I; the Laplacian stores an explicit
    // diagonal, so the shift lands on existing entries.
    const double sigma = 1e-3;
    SpMat K(n, n);
    {
        std::vector<Triplet> trip;
        trip.reserve(lapPair.laplacian.nonZeros());
        for (Index col = 0; col < n; ++col)
            for (SpMat::InnerIterator it(lapPair.laplacian, col); it; ++it) {
                double v = it.value() * dinv[it.row()] * dinv[col];
                if (it.row() == col)
                    v += sigma;
                trip.emplace_back(it.row(), col, v);
            }
        K.setFromTriplets(trip.begin(), trip.end());
        K.makeCompressed();
    }
    const ShiftedSolver solver(K);

    const Vec u = dsqrt / dsqrt.norm(); // trivial eigenvector, deflated throughout

    const Index mMax = std::min<Index>(n - 1, std::max<Index>(4 * k + 30, 60));
    Mat basis(n, mMax + 1);
    Mat proj = Mat::Zero(mMax + 1, mMax + 1); // projected operator, leading block valid

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_vec = [&] {
        Vec r(n);
        for (Index i = 0; i < n; ++i)
            r[i] = gauss(rng);
        return r;
    };

    Vec coeff(mMax + 1);
    // Orthogonalizes w against u and basis columns [0, cols), two passes.
    // When col >= 0, records coefficients into row/column col of proj.
    auto orthogonalize = [&](Vec& w, Index cols, Index col) {
        coeff.head(cols).setZero();
        for (int pass = 0; pass < 2; ++pass) {
            w -= u.dot(w) * u;
            for (Index i = 0; i < cols; ++i) {
                const double c = basis.col(i).dot(w);
                w -= c * basis.col(i);
                coeff[i] += c;
            }
        }
        if (col >= 0)
            for (Index i = 0; i < cols; ++i) {
                proj(i, col) = coeff[i];
                proj(col, i) = coeff[i];
            }
    };

    auto seeded_direction = [&](Index cols) {
        for (int attempt = 0; attempt < 16; ++attempt) {
            Vec r = random_vec();
            orthogonalize(r, cols, -1);
            const double norm = r.norm();
            if (norm > 1e-8)
                return Vec(r / norm);
        }
        throw NumericError("eigensolver: could not seed a new direction");
    };

    SpectralState state;
    state.k = k;
    state.lap = lapPair;
    state.stats.floored = count_zero_degrees(lapPair, kDegreeFloor * (1.0 + 1e-12));

    basis.col(0) = seeded_direction(0);
    Index j = 0; // completed columns; basis has j+1 valid ones
    double betaLast = 0.0;
    const int maxRestarts = 50 * k;
    const double lapScale = lapPair.laplacian.norm(); // Frobenius

    Eigen::SelfAdjointEigenSolver<Mat> small;
    const Index checkStride = 8;
    Index checkAt = std::min<Index>(mMax, std::max<Index>(k + 2, 24));
    for (;;) {
        while (j < checkAt) {
            Vec w = solver.solve(basis.col(j));
            orthogonalize(w, j + 1, j);
            betaLast = w.norm();
            ++state.stats.iterations;
            ++j;
            if (betaLast < 1e-13) {
                // invariant subspace; couple nothing and re-seed if room remains
                betaLast = 0.0;
                if (j < mMax) {
                    basis.col(j) = seeded_direction(j);
                    continue;
                }
                break;
            }
            proj(j, j - 1) = betaLast;
            proj(j - 1, j) = betaLast;
            basis.col(j) = w / betaLast;
        }

        // Rayleigh-Ritz on the projected operator
        small.compute(proj.topLeftCorner(j, j));
        if (small.info() != Eigen::Success)
            throw NumericError("eigensolver: projected solve failed");

        // wanted Ritz pairs: k largest of K^-1 (= k smallest lambda),
        // Eigen returns ascending
        const Index nRitz = j;
        auto ritz_index = [&](int i) { return nRitz - 1 - i; };
        bool converged = nRitz >= k;
        if (converged) {
            const double scale = std::max(1.0, std::abs(small.eigenvalues()(ritz_index(0))));
            for (int i = 0; i < k; ++i) {
                const double res = betaLast * std::abs(small.eigenvectors()(j - 1, ritz_index(i)));
                if (res > kRitzTol * scale) {
                    converged = false;
                    break;
                }
            }
        }

        if (converged) {
            state.pairs.clear();
            state.pairs.reserve(k);
            double maxResidual = 0.0;
            for (int i = 0; i < k; ++i) {
                const double theta = small.eigenvalues()(ritz_index(i));
                if (theta <= 0.0)
                    throw NumericError("eigensolver: nonpositive Ritz value");
                EigenPair pair;
                pair.value = std::max(0.0, 1.0 / theta - sigma);
                const Vec x = basis.leftCols(j) * small.eigenvectors().col(ritz_index(i));
                pair.vector = dinv.cwiseProduct(x);
                canonicalize_sign(pair.vector);
                const double res = (lapPair.laplacian * pair.vector -
                                    pair.value * lapPair.degrees.cwiseProduct(pair.vector))
                                       .norm();
                maxResidual = std::max(maxResidual, res);
                state.pairs.push_back(std::move(pair)); // already ascending in lambda
            }
            state.stats.max_residual = maxResidual;
            if (maxResidual <= 1e-8 * std::max(1.0, lapScale)) {
                const double zeroTol = 1e-8 * std::max(1.0, state.pairs.back().value);
                state.stats.near_zero = 0;
                for (const auto& p : state.pairs)
                    if (p.value <= zeroTol)
                        ++state.stats.near_zero;
                return state;
            }
            converged = false; // true residual too large; keep iterating
        }

        if (j < mMax) { // grow further before the next Rayleigh-Ritz pass
            checkAt = std::min<Index>(mMax, j + checkStride);
            continue;
        }

        if (state.stats.restarts >= maxRestarts)
            throw NumericError("eigensolver failed to converge within restart budget");
        ++state.stats.restarts;

        // thick restart: retain leading Ritz vectors plus the residual direction
        Index keep = std::min<Index>(k + 10, j - 2);
        keep = std::max<Index>(keep, std::min<Index>(k, j - 1));
        keep = std::max<Index>(keep, 1);
        if (keep + 1 > mMax)
            throw NumericError("eigensolver stalled: basis too small to restart");
        Mat retained(n, keep);
        for (Index i = 0; i < keep; ++i)
            retained.col(i) =
                basis.leftCols(j) * small.eigenvectors().col(ritz_index(static_cast<int>(i)));
        const Vec next = betaLast > 1e-13 ? Vec(basis.col(j)) : random_vec();
        basis.leftCols(keep) = retained;
        proj.setZero();
        for (Index i = 0; i < keep; ++i)
            proj(i, i) = small.eigenvalues()(ritz_index(static_cast<int>(i)));
        Vec fresh = next;
        orthogonalize(fresh, keep, -1);
        const double norm = fresh.norm();
        basis.col(keep) = norm > 1e-8 ? Vec(fresh / norm) : seeded_direction(keep);
        j = keep;
        betaLast = 0.0;
        checkAt = std::min<Index>(mMax, j + checkStride);
    }
}

} // namespace dyne
