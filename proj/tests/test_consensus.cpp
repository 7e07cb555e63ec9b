#include "dyne/consensus.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dyne;

namespace {

Mat random_matrix(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = gauss(rng);
    return m;
}

Mat orthonormal_columns(Index rows, Index cols, std::uint64_t seed) {
    const Mat m = random_matrix(rows, cols, seed);
    return Eigen::HouseholderQR<Mat>(m).householderQ() * Mat::Identity(rows, cols);
}

} // namespace

TEST_CASE("identical embeddings fuse with top gamma 2") {
    const Mat ya = random_matrix(30, 4, 1);
    const auto [proj, emb] = fuse(ya, ya, 2);
    CHECK(proj.gammas[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(proj.gammas.size() == 2);
    CHECK(emb.y.rows() == 30);
    CHECK(emb.y.cols() == 2);
}

TEST_CASE("orthogonal views have a flat gamma spectrum at 1") {
    const Mat q = orthonormal_columns(40, 8, 2);
    const Mat ya = q.leftCols(4);
    const Mat yx = q.rightCols(4); // columns orthogonal to ya's
    const auto [proj, emb] = fuse(ya, yx, 4);
    for (Index i = 0; i < proj.gammas.size(); ++i)
        CHECK(proj.gammas[i] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("random fuse matches the dense oracle on the assembled blocks") {
    const Index n = 40, k = 5, l = 3;
    const Mat ya = random_matrix(n, k, 13);
    const Mat yx = random_matrix(n, k, 14);
    const double ridge = 1e-8;
    const auto [proj, emb] = fuse(ya, yx, l, ridge);

    Mat left(2 * k, 2 * k), right = Mat::Zero(2 * k, 2 * k);
    left.topLeftCorner(k, k) = ya.transpose() * ya;
    left.topRightCorner(k, k) = ya.transpose() * yx;
    left.bottomLeftCorner(k, k) = yx.transpose() * ya;
    left.bottomRightCorner(k, k) = yx.transpose() * yx;
    right.topLeftCorner(k, k) = ya.transpose() * ya;
    right.bottomRightCorner(k, k) = yx.transpose() * yx;
    right.diagonal().array() += ridge;

    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(left, right);
    for (Index i = 0; i < l; ++i) {
        CHECK(proj.gammas[i] ==
              doctest::Approx(es.eigenvalues()(2 * k - 1 - i)).epsilon(1e-8));
        // vectors agree up to sign
        Vec expect = es.eigenvectors().col(2 * k - 1 - i);
        if ((expect - proj.p.col(i)).norm() > (expect + proj.p.col(i)).norm())
            expect = -expect;
        CHECK((proj.p.col(i) - expect).cwiseAbs().maxCoeff() <= 1e-8);
    }

    // embedding is the stacked product
    Mat stacked(n, 2 * k);
    stacked << ya, yx;
    CHECK((emb.y - stacked * proj.p).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("projection columns are B-orthonormal and gammas descend") {
    const Index n = 50, k = 6, l = 6;
    const Mat ya = random_matrix(n, k, 21);
    const Mat yx = random_matrix(n, k, 22);
    const auto [proj, emb] = fuse(ya, yx, l);

    Mat right = Mat::Zero(2 * k, 2 * k);
    right.topLeftCorner(k, k) = ya.transpose() * ya;
    right.bottomRightCorner(k, k) = yx.transpose() * yx;
    right.diagonal().array() += 1e-8 * right.trace() / (2 * k);

    const Mat gram = proj.p.transpose() * right * proj.p;
    CHECK((gram - Mat::Identity(l, l)).cwiseAbs().maxCoeff() <= 1e-8);
    for (Index i = 1; i < l; ++i)
        CHECK(proj.gammas[i] <= proj.gammas[i - 1] + 1e-12);
}

TEST_CASE("objective value is gamma and dominates random feasible vectors") {
    const Index n = 45, k = 4;
    const Mat ya = random_matrix(n, k, 31);
    const Mat yx = random_matrix(n, k, 32);
    // random gram blocks are full rank, so the exact identity needs no ridge
    const auto [proj, emb] = fuse(ya, yx, 2, 0.0);

    Mat left(2 * k, 2 * k), right0 = Mat::Zero(2 * k, 2 * k);
    left.topLeftCorner(k, k) = ya.transpose() * ya;
    left.topRightCorner(k, k) = ya.transpose() * yx;
    left.bottomLeftCorner(k, k) = yx.transpose() * ya;
    left.bottomRightCorner(k, k) = yx.transpose() * yx;
    right0.topLeftCorner(k, k) = ya.transpose() * ya;
    right0.bottomRightCorner(k, k) = yx.transpose() * yx;

    const Vec p0 = proj.p.col(0);
    const double objective = p0.dot(left * p0);
    const double constraint = p0.dot(right0 * p0);
    CHECK(std::abs(objective - proj.gammas[0] * constraint) <= 1e-8 * std::abs(objective));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Vec z(2 * k);
        for (Index i = 0; i < z.size(); ++i)
            z[i] = gauss(rng);
        // rescale to the constraint surface z' right0 z = constraint
        const double s = z.dot(right0 * z);
        if (s <= 0.0)
            continue;
        z *= std::sqrt(constraint / s);
        CHECK(z.dot(left * z) <= objective + 1e-6 * std::abs(objective));
    }
}

TEST_CASE("fused subspace is invariant to orthogonal rotation of one view") {
    const Index n = 40, k = 4, l = 3;
    const Mat ya = random_matrix(n, k, 41);
    const Mat yx = random_matrix(n, k, 42);
    const Mat r = orthonormal_columns(k, k, 43);

    const auto [projA, embA] = fuse(ya, yx, l);
    const auto [projB, embB] = fuse(ya * r, yx, l);
    CHECK(oracle::max_principal_angle(embA.y, embB.y) <= 1e-6);
}

TEST_CASE("gamma spectrum is scale invariant") {
    const Index n = 35, k = 4;
    const Mat ya = random_matrix(n, k, 51);
    const Mat yx = random_matrix(n, k, 52);
    const auto [projA, embA] = fuse(ya, yx, 4, 0.0);
    const auto [projB, embB] = fuse(3.0 * ya, yx, 4, 0.0);
    for (Index i = 0; i < 4; ++i)
        CHECK(projA.gammas[i] == doctest::Approx(projB.gammas[i]).epsilon(1e-9));
}

TEST_CASE("error paths") {
    const Mat ya = random_matrix(20, 3, 61);
    SUBCASE("l out of range") {
        CHECK_THROWS_AS(fuse(ya, ya, 7), Error);
        CHECK_THROWS_AS(fuse(ya, ya, 0), Error);
    }
    SUBCASE("singular right-hand matrix with zero ridge advises a ridge") {
        Mat degenerate = ya;
        degenerate.col(1) = degenerate.col(0); // rank-deficient gram
        CHECK_THROWS_WITH_AS(fuse(degenerate, degenerate, 2, 0.0),
                             doctest::Contains("ridge"), Error);
    }
    SUBCASE("mismatched shapes") {
        const Mat yx = random_matrix(21, 3, 62);
        CHECK_THROWS_AS(fuse(ya, yx, 2), Error);
    }
}
