#include "dyne/io.hpp"

#include "dyne/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace dyne;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dyne_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SynthData small_data(int steps) {
    SbmSpec spec;
    spec.n = 40;
    spec.blocks = 2;
    spec.p_in = 0.4;
    spec.p_out = 0.05;
    spec.attr_dim = 5;
    spec.attr_signal = 1.2;
    spec.drift_rate = 0.01;
    spec.steps = steps;
    spec.seed = 11;
    return generate(spec);
}

} // namespace

TEST_CASE("edge file round trip with comments") {
    TempDir dir;
    const auto path = dir.file("edges.tsv");
    write_file(path, "# a comment\n0\t1\t1.5\n\n1\t2\t0.25\n");
    const SpMat m = read_edge_file(path);
    CHECK(m.rows() == 3);
    CHECK(m.coeff(0, 1) == 1.5);
    CHECK(m.coeff(1, 0) == 1.5);
    CHECK(m.coeff(2, 1) == 0.25);

    const auto out = dir.file("roundtrip.tsv");
    write_edge_file(out, m);
    const SpMat again = read_edge_file(out);
    CHECK((Mat(again) - Mat(m)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("edge file parse errors carry the line number") {
    TempDir dir;
    SUBCASE("wrong field count") {
        const auto path = dir.file("bad.tsv");
        write_file(path, "0\t1\n");
        CHECK_THROWS_WITH_AS(read_edge_file(path), doctest::Contains(":1:"), ParseError);
    }
    SUBCASE("self loop") {
        const auto path = dir.file("loop.tsv");
        write_file(path, "2\t2\t1.0\n");
        CHECK_THROWS_WITH_AS(read_edge_file(path), doctest::Contains("self-loop"), ParseError);
    }
    SUBCASE("duplicate edge") {
        const auto path = dir.file("dup.tsv");
        write_file(path, "0\t1\t1.0\n1\t0\t2.0\n");
        CHECK_THROWS_WITH_AS(read_edge_file(path), doctest::Contains("duplicate"), ParseError);
    }
    SUBCASE("negative weight in a base file") {
        const auto path = dir.file("neg.tsv");
        write_file(path, "0\t1\t-1.0\n");
        CHECK_THROWS_AS(read_edge_file(path), ParseError);
    }
    SUBCASE("missing file names the path") {
        CHECK_THROWS_WITH_AS(read_edge_file(dir.file("absent.tsv")),
                             doctest::Contains("absent.tsv"), ParseError);
    }
}

TEST_CASE("delta marker discipline") {
    TempDir dir;
    SUBCASE("base loader rejects #delta files") {
        const auto path = dir.file("d.tsv");
        write_file(path, "#delta\n0\t1\t-0.5\n");
        CHECK_THROWS_AS(read_edge_file(path), ParseError);
    }
    SUBCASE("delta loader requires the marker") {
        const auto path = dir.file("nomark.tsv");
        write_file(path, "0\t1\t-0.5\n");
        CHECK_THROWS_AS(read_edge_file(path, -1, /*expect_delta=*/true), ParseError);
    }
    SUBCASE("delta loader accepts negative weights") {
        const auto path = dir.file("ok.tsv");
        write_file(path, "#delta\n0\t1\t-0.5\n");
        const SpMat m = read_edge_file(path, 3, /*expect_delta=*/true);
        CHECK(m.coeff(0, 1) == -0.5);
        CHECK(m.coeff(1, 0) == -0.5);
    }
}

TEST_CASE("labels round trip and validation") {
    TempDir dir;
    const auto path = dir.file("labels.tsv");
    write_labels(path, {1, 0, 2, 1});
    CHECK(read_labels(path) == std::vector<int>{1, 0, 2, 1});

    SUBCASE("missing node is an error") {
        const auto bad = dir.file("gap.tsv");
        write_file(bad, "0\t1\n2\t0\n");
        CHECK_THROWS_WITH_AS(read_labels(bad), doctest::Contains("missing label"), ParseError);
    }
}

TEST_CASE("embedding TSV round trip") {
    TempDir dir;
    Mat y(3, 2);
    y << 0.25, -1.0 / 3.0, 1e-17, 2.0, -0.75, 5.5;
    const auto path = dir.file("emb.tsv");
    write_embedding_tsv(path, y);
    const Mat back = read_embedding_tsv(path);
    CHECK((back - y).cwiseAbs().maxCoeff() == 0.0); // %.17g is lossless for doubles
}

TEST_CASE("checkpoint save/load resumes the exact pipeline state") {
    const SynthData data = small_data(3);
    RunConfig config;
    config.k = 3;
    config.l = 3;
    config.seed = 11;

    // in-memory reference: three online steps
    EmbeddingRun memory = init_offline(data.snapshot, config);
    TempDir dir;
    const auto ck = dir.file("checkpoint.json");
    save_checkpoint(ck, memory);
    EmbeddingRun loaded = load_checkpoint(ck);

    for (int t = 0; t < 3; ++t) {
        memory = step_online(memory, data.deltas[t]);
        loaded = step_online(loaded, data.deltas[t]);
        // the reloaded stream reproduces the in-memory one exactly
        CHECK((memory.embedding.y - loaded.embedding.y).cwiseAbs().maxCoeff() == 0.0);
        // checkpoint each step and continue from disk
        save_checkpoint(ck, loaded);
        loaded = load_checkpoint(ck);
    }
    CHECK(loaded.step == 3);
    CHECK(loaded.drift.refresh_count == memory.drift.refresh_count);
}

TEST_CASE("checkpoint version and digest guards") {
    const SynthData data = small_data(0);
    RunConfig config;
    config.k = 2;
    config.l = 2;
    const EmbeddingRun run = init_offline(data.snapshot, config);
    TempDir dir;
    const auto ck = dir.file("checkpoint.json");
    save_checkpoint(ck, run);

    SUBCASE("stale version") {
        std::string text = read_file(ck);
        const auto pos = text.find("\"version\":1");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 11, "\"version\":9");
        write_file(ck, text);
        CHECK_THROWS_AS(load_checkpoint(ck), StaleCheckpoint);
    }

    SUBCASE("corrupted payload fails the digest") {
        std::string text = read_file(ck);
        // flip one adjacency weight from 1.0 to 2.0 inside the entries array
        const auto pos = text.find("\"adjacency\":{\"cols\"");
        REQUIRE(pos != std::string::npos);
        const auto vpos = text.find(",1.0]", pos);
        REQUIRE(vpos != std::string::npos);
        text.replace(vpos, 5, ",2.0]");
        write_file(ck, text);
        CHECK_THROWS_WITH_AS(load_checkpoint(ck), doctest::Contains("digest"), Error);
    }

    SUBCASE("garbage is a parse error") {
        write_file(ck, "not json");
        CHECK_THROWS_AS(load_checkpoint(ck), ParseError);
    }
}

TEST_CASE("manifest round trip") {
    TempDir dir;
    const auto path = dir.file("manifest.json");
    const std::vector<ManifestEntry> deltas = {{"de0.tsv", "da0.tsv"}, {"de1.tsv", "da1.tsv"}};
    write_manifest(path, "edges.tsv", "attrs.tsv", "labels.tsv", deltas);
    const auto back = read_manifest(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].edges == "de0.tsv");
    CHECK(back[1].attrs == "da1.tsv");
}

TEST_CASE("config json honors partial keys") {
    const RunConfig c = run_config_from_json("{\"k\": 12, \"seed\": 99}");
    CHECK(c.k == 12);
    CHECK(c.seed == 99);
    CHECK(c.l == RunConfig{}.l); // untouched default
}

TEST_CASE("metrics writers") {
    TempDir dir;
    const std::vector<MetricRow> rows = {{"cluster", "nmi", 0.5, 8, 2}};
    write_metrics_csv(dir.file("m.csv"), rows);
    write_metrics_json(dir.file("m.json"), rows);
    const std::string csv = read_file(dir.file("m.csv"));
    CHECK(csv.find("task,metric,value,dim,step") == 0);
    CHECK(csv.find("cluster,nmi,0.5,8,2") != std::string::npos);
}
