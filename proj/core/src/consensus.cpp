#include "dyne/consensus.hpp"

#include "dyne/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <string>

namespace dyne {

std::pair<ConsensusProjection, ConsensusEmbedding> fuse(const Mat& ya, const Mat& yx,
                                                        Index l, double ridge) {
    if (ya.rows() != yx.rows())
        throw Error("embeddings must cover the same nodes");
    if (ya.cols() != yx.cols())
        throw Error("embeddings must have the same intermediate dimension");
    const Index k = ya.cols();
    if (k < 1)
        throw Error("intermediate embeddings are empty");
    if (l < 1 || l > 2 * k)
        throw Error("consensus dimension l = " + std::to_string(l) +
                    " must satisfy 1 <= l <= 2k = " + std::to_string(2 * k));

    const Mat caa = ya.transpose() * ya;
    const Mat cax = ya.transpose() * yx;
    const Mat cxx = yx.transpose() * yx;

    Mat left(2 * k, 2 * k);
    left.topLeftCorner(k, k) = caa;
    left.topRightCorner(k, k) = cax;
    left.bottomLeftCorner(k, k) = cax.transpose();
    left.bottomRightCorner(k, k) = cxx;

    Mat right = Mat::Zero(2 * k, 2 * k);
    right.topLeftCorner(k, k) = caa;
    right.bottomRightCorner(k, k) = cxx;

    if (ridge < 0.0)
        ridge = 1e-8 * right.trace() / static_cast<double>(2 * k);
    right.diagonal().array() += ridge;

    {
        Eigen::LLT<Mat> llt(right);
        if (llt.info() != Eigen::Success)
            throw Error("right-hand matrix is numerically singular; use ridge > 0");
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> solver(left, right);
    if (solver.info() != Eigen::Success)
        throw NumericError("consensus eigen-solve failed");

    // Eigen returns ascending gamma with B-orthonormal vectors; the
    // maximization objective wants the largest l.
    ConsensusProjection proj;
    proj.p.resize(2 * k, l);
    proj.gammas.resize(l);
    for (Index i = 0; i < l; ++i) {
        const Index src = 2 * k - 1 - i;
        proj.gammas[i] = solver.eigenvalues()(src);
        Vec col = solver.eigenvectors().col(src);
        canonicalize_sign(col);
        proj.p.col(i) = col;
    }

    ConsensusEmbedding emb;
    emb.y.resize(ya.rows(), l);
    emb.y = ya * proj.p.topRows(k) + yx * proj.p.bottomRows(k);
    return {std::move(proj), std::move(emb)};
}

} // namespace dyne
