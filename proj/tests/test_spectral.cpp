#include "dyne/spectral.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dyne;

namespace {

SpMat complete_graph(Index n) {
    std::vector<Triplet> trip;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j)
                trip.emplace_back(i, j, 1.0);
    SpMat m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

SpMat path3() {
    SpMat m(3, 3);
    std::vector<Triplet> trip{{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}};
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

} // namespace

TEST_CASE("complete graph K4: all nontrivial eigenvalues equal n/(n-1)") {
    const LaplacianPair lap = build_laplacian(complete_graph(4));
    const SpectralState s = solve_topk(lap, 3, 0);
    REQUIRE(s.pairs.size() == 3);
    for (const auto& p : s.pairs) {
        CHECK(p.value == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
        const double res =
            (lap.laplacian * p.vector - p.value * lap.degrees.cwiseProduct(p.vector)).norm();
        CHECK(res <= 1e-8 * Mat(lap.laplacian).norm());
    }
    // dense oracle agrees
    const auto oracleResult = oracle::dense_gevd(lap);
    for (int i = 0; i < 3; ++i)
        CHECK(s.pairs[i].value == doctest::Approx(oracleResult.values[i + 1]).epsilon(1e-9));
}

TEST_CASE("path graph, k = 1") {
    const LaplacianPair lap = build_laplacian(path3());
    const SpectralState s = solve_topk(lap, 1, 3);
    REQUIRE(s.pairs.size() == 1);
    const auto oracleResult = oracle::dense_gevd(lap);
    CHECK(std::abs(s.pairs[0].value - oracleResult.values[1]) <= 1e-10);
    const double dnorm =
        s.pairs[0].vector.cwiseProduct(lap.degrees).dot(s.pairs[0].vector);
    CHECK(dnorm == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("pairs are D-orthonormal") {
    const SpMat g = oracle::random_connected_graph(40, 0.2, 17, /*weighted=*/true);
    const SpectralState s = solve_topk(build_laplacian(g), 6, 17);
    CHECK(orthonormality_defect(s) <= 1e-8);
}

TEST_CASE("embedding_matrix") {
    SUBCASE("k = 1 equals the single eigenvector") {
        const SpectralState s = solve_topk(build_laplacian(path3()), 1, 0);
        const Mat y = embedding_matrix(s);
        CHECK(y.rows() == 3);
        CHECK(y.cols() == 1);
        CHECK((y.col(0) - s.pairs[0].vector).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("K4 columns span the D-orthogonal complement of the constant vector") {
        const LaplacianPair lap = build_laplacian(complete_graph(4));
        const SpectralState s = solve_topk(lap, 3, 1);
        const Mat y = embedding_matrix(s);
        const Vec ones = Vec::Ones(4);
        // 1' D y_j = 0 for all columns
        const Vec proj = y.transpose() * lap.degrees.cwiseProduct(ones);
        CHECK(proj.cwiseAbs().maxCoeff() <= 1e-9);
    }

    SUBCASE("shape n=100 k=10") {
        const SpMat g = oracle::random_connected_graph(100, 0.1, 5);
        const Mat y = embedding_matrix(solve_topk(build_laplacian(g), 10, 5));
        CHECK(y.rows() == 100);
        CHECK(y.cols() == 10);
    }
}

TEST_CASE("reorthonormalize") {
    const SpMat g = oracle::random_connected_graph(30, 0.25, 5, /*weighted=*/true);
    const SpectralState s = solve_topk(build_laplacian(g), 5, 5);

    SUBCASE("idempotent on an orthonormal state") {
        const SpectralState r = reorthonormalize(s);
        for (std::size_t i = 0; i < s.pairs.size(); ++i)
            CHECK((r.pairs[i].vector - s.pairs[i].vector).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SUBCASE("restores unit D-norms after scaling") {
        SpectralState scaled = s;
        for (auto& p : scaled.pairs)
            p.vector *= 2.0;
        const SpectralState r = reorthonormalize(std::move(scaled));
        CHECK(orthonormality_defect(r) <= 1e-10);
        for (std::size_t i = 0; i < s.pairs.size(); ++i)
            CHECK((r.pairs[i].vector - s.pairs[i].vector).cwiseAbs().maxCoeff() <= 1e-10);
    }

    SUBCASE("random perturbation is cleaned up") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> gauss(0.0, 1.0);
        SpectralState noisy = s;
        for (auto& p : noisy.pairs)
            for (Index i = 0; i < p.vector.size(); ++i)
                p.vector[i] += 1e-3 * gauss(rng);
        const SpectralState r = reorthonormalize(std::move(noisy));
        CHECK(orthonormality_defect(r) <= 1e-10);
    }

    SUBCASE("degenerate basis raises") {
        SpectralState bad = s;
        bad.pairs[1].vector = bad.pairs[0].vector;
        CHECK_THROWS_WITH_AS(reorthonormalize(std::move(bad)),
                             doctest::Contains("degenerate basis"), NumericError);
    }
}

TEST_CASE("trace minimization among random D-orthonormal competitors") {
    const SpMat g = oracle::random_connected_graph(25, 0.3, 11, /*weighted=*/true);
    const LaplacianPair lap = build_laplacian(g);
    const int k = 4;
    const SpectralState s = solve_topk(lap, k, 11);
    const Mat y = embedding_matrix(s);
    const double own = (y.transpose() * Mat(lap.laplacian) * y).trace();

    std::mt19937_64 rng(123);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        SpectralState z = s;
        for (auto& p : z.pairs) {
            for (Index i = 0; i < p.vector.size(); ++i)
                p.vector[i] = gauss(rng);
        }
        z = reorthonormalize(std::move(z));
        const Mat zy = embedding_matrix(z);
        const double other = (zy.transpose() * Mat(lap.laplacian) * zy).trace();
        CHECK(own <= other + 1e-6);
    }
}

TEST_CASE("deterministic for a fixed seed") {
    const SpMat g = oracle::random_connected_graph(40, 0.2, 2);
    const LaplacianPair lap = build_laplacian(g);
    const SpectralState a = solve_topk(lap, 5, 99);
    const SpectralState b = solve_topk(lap, 5, 99);
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
        CHECK(a.pairs[i].value == b.pairs[i].value);
        CHECK((a.pairs[i].vector - b.pairs[i].vector).cwiseAbs().maxCoeff() == 0.0);
    }
    // sign canonicalization: largest-magnitude entry positive
    for (const auto& p : a.pairs) {
        Index at = 0;
        p.vector.cwiseAbs().maxCoeff(&at);
        CHECK(p.vector[at] > 0.0);
    }
}

TEST_CASE("eigenvalues are invariant under node relabeling") {
    const Index n = 24;
    const SpMat g = oracle::random_connected_graph(n, 0.25, 31, /*weighted=*/true);

    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(8);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Triplet> trip;
    for (Index col = 0; col < g.outerSize(); ++col)
        for (SpMat::InnerIterator it(g, col); it; ++it)
            trip.emplace_back(perm[it.row()], perm[col], it.value());
    SpMat gp(n, n);
    gp.setFromTriplets(trip.begin(), trip.end());

    const SpectralState a = solve_topk(build_laplacian(g), 5, 1);
    const SpectralState b = solve_topk(build_laplacian(gp), 5, 1);
    for (int i = 0; i < 5; ++i)
        CHECK(std::abs(a.pairs[i].value - b.pairs[i].value) <= 1e-10);

    // vectors permute accordingly (up to sign): compare subspaces
    Mat ya = embedding_matrix(a);
    Mat yaPerm(n, ya.cols());
    for (Index i = 0; i < n; ++i)
        yaPerm.row(perm[i]) = ya.row(i);
    CHECK(oracle::max_principal_angle(yaPerm, embedding_matrix(b)) <= 1e-6);
}

TEST_CASE("error paths") {
    SUBCASE("k + 1 > n") {
        CHECK_THROWS_AS(solve_topk(build_laplacian(path3()), 3, 0), Error);
    }
    SUBCASE("zero-degree node points at floor_degrees") {
        SpMat g(4, 4); // node 3 isolated
        std::vector<Triplet> trip{{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}};
        g.setFromTriplets(trip.begin(), trip.end());
        const LaplacianPair lap = build_laplacian(g);
        CHECK_THROWS_WITH_AS(solve_topk(lap, 2, 0), doctest::Contains("floor_degrees"), Error);
        // flooring makes it solvable and reports the floored count
        const SpectralState s = solve_topk(floor_degrees(lap), 2, 0);
        CHECK(s.stats.floored == 1);
    }
}

TEST_CASE("disconnected graphs return near-zero pairs instead of failing") {
    // two disjoint triangles: one extra zero eigenvalue beyond the deflated one
    std::vector<Triplet> trip;
    for (Index base : {Index(0), Index(3)})
        for (Index i = 0; i < 3; ++i)
            for (Index j = 0; j < 3; ++j)
                if (i != j)
                    trip.emplace_back(base + i, base + j, 1.0);
    SpMat g(6, 6);
    g.setFromTriplets(trip.begin(), trip.end());
    const SpectralState s = solve_topk(build_laplacian(g), 3, 7);
    REQUIRE(s.pairs.size() == 3);
    CHECK(s.stats.near_zero == 1);
    CHECK(s.pairs[0].value <= 1e-10);
    CHECK(s.pairs[1].value > 1e-6);
}
