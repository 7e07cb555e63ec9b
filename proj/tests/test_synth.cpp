#include "dyne/synth.hpp"

#include "dyne/eval.hpp"
#include "dyne/pipeline.hpp"

#include <doctest.h>

#include <cmath>

using namespace dyne;

TEST_CASE("zero drift means empty deltas") {
    SbmSpec spec;
    spec.n = 40;
    spec.blocks = 2;
    spec.p_in = 0.4;
    spec.p_out = 0.05;
    spec.attr_dim = 5;
    spec.drift_rate = 0.0;
    spec.steps = 4;
    spec.seed = 3;
    const SynthData data = generate(spec);
    CHECK(data.deltas.size() == 4);
    for (const auto& d : data.deltas)
        CHECK(d.empty());
}

TEST_CASE("planted two-clique partition is recovered exactly") {
    SbmSpec spec;
    spec.n = 24;
    spec.blocks = 2;
    spec.p_in = 1.0;
    spec.p_out = 0.0;
    spec.attr_dim = 6;
    spec.attr_signal = 1.5;
    spec.steps = 0;
    spec.seed = 5;
    const SynthData data = generate(spec);

    RunConfig config;
    config.k = 2;
    config.l = 2;
    config.seed = 5;
    const EmbeddingRun run = init_offline(data.snapshot, config);
    const auto m = clustering_metrics(kmeans(run.embedding.y, 2, 10, 5), data.labels);
    CHECK(m.acc == 1.0);
}

TEST_CASE("edge count sits within three sigma of the binomial expectation") {
    SbmSpec spec;
    spec.n = 200;
    spec.blocks = 3;
    spec.p_in = 0.15;
    spec.p_out = 0.02;
    spec.attr_dim = 8;
    spec.steps = 0;
    spec.seed = 17;
    const SynthData data = generate(spec);

    double withinPairs = 0.0, acrossPairs = 0.0;
    for (Index i = 0; i < spec.n; ++i)
        for (Index j = i + 1; j < spec.n; ++j)
            (data.labels[i] == data.labels[j] ? withinPairs : acrossPairs) += 1.0;
    const double mean = withinPairs * spec.p_in + acrossPairs * spec.p_out;
    const double sigma = std::sqrt(withinPairs * spec.p_in * (1.0 - spec.p_in) +
                                   acrossPairs * spec.p_out * (1.0 - spec.p_out));
    const double edges = static_cast<double>(data.snapshot.adjacency.nonZeros()) / 2.0;
    CHECK(std::abs(edges - mean) <= 3.0 * sigma);
}

TEST_CASE("deltas keep the snapshot valid and follow the drift budget") {
    SbmSpec spec;
    spec.n = 150;
    spec.blocks = 3;
    spec.p_in = 0.3;
    spec.p_out = 0.04;
    spec.attr_dim = 10;
    spec.attr_signal = 1.0;
    spec.drift_rate = 0.01;
    spec.steps = 6;
    spec.seed = 23;
    const SynthData data = generate(spec);

    Snapshot current = data.snapshot;
    for (const auto& delta : data.deltas) {
        // the changed edge mass stays within the smooth-evolution budget:
        // ||dA||_F^2 / ||A||_F^2 <= 2 * drift * (1 + eps)
        const double dnorm2 = Mat(delta.adj).squaredNorm();
        const double anorm2 = Mat(current.adjacency).squaredNorm();
        CHECK(dnorm2 / anorm2 <= 2.0 * spec.drift_rate * 1.05);

        // Snapshot::make re-validates symmetry/non-negativity on apply
        current = apply_delta(current, delta);
        current = Snapshot::make(current.adjacency, current.attributes);
        CHECK(current.adjacency.coeffs().minCoeff() >= 0.0);
    }
}

TEST_CASE("generation is deterministic per seed") {
    SbmSpec spec;
    spec.n = 60;
    spec.blocks = 2;
    spec.p_in = 0.3;
    spec.p_out = 0.05;
    spec.attr_dim = 4;
    spec.drift_rate = 0.01;
    spec.steps = 2;
    spec.seed = 31;
    const SynthData a = generate(spec);
    const SynthData b = generate(spec);
    CHECK((Mat(a.snapshot.adjacency) - Mat(b.snapshot.adjacency)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((Mat(a.snapshot.attributes) - Mat(b.snapshot.attributes)).cwiseAbs().maxCoeff() ==
          0.0);
    for (std::size_t t = 0; t < a.deltas.size(); ++t)
        CHECK((Mat(a.deltas[t].adj) - Mat(b.deltas[t].adj)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid parameters are rejected") {
    SbmSpec spec;
    spec.n = 50;
    spec.blocks = 2;
    SUBCASE("p_out above p_in") {
        spec.p_in = 0.1;
        spec.p_out = 0.5;
        CHECK_THROWS_AS(generate(spec), Error);
    }
    SUBCASE("drift rate above one") {
        spec.drift_rate = 1.5;
        CHECK_THROWS_AS(generate(spec), Error);
    }
    SUBCASE("empty graph") {
        spec.p_in = 0.0;
        spec.p_out = 0.0;
        CHECK_THROWS_WITH_AS(generate(spec), doctest::Contains("empty graph"), Error);
    }
}
