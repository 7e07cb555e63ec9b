// Command line front end: offline embedding, online updates from delta
// files, downstream evaluation, synthetic data generation, and the
// online-vs-offline timing harness.

#include "dyne/bench.hpp"
#include "dyne/eval.hpp"
#include "dyne/io.hpp"
#include "dyne/pipeline.hpp"
#include "dyne/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace dyne;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitStale = 3;

struct ConfigFlags {
    std::string configFile;
    RunConfig config;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", configFile, "JSON config file (flags override it)");
        cmd->add_option("--k", config.k, "intermediate embedding dimension per source");
        cmd->add_option("--l", config.l, "consensus embedding dimension");
        cmd->add_option("--seed", config.seed, "random seed");
        cmd->add_option("--ridge", config.ridge, "consensus ridge (< 0: auto)");
        cmd->add_option("--gap-tol", config.gap_tol, "small-gap guard scale");
        cmd->add_option("--refresh-every", config.refresh_every,
                        "full re-solve every N steps (0: disabled)");
        cmd->add_option("--refresh-residual", config.refresh_residual,
                        "residual refresh threshold (< 0: auto)");
        cmd->add_option("--threads", config.threads, "branch-update parallelism");
    }

    // precedence: explicit flags > config file > defaults
    RunConfig resolve(const CLI::App* cmd) const {
        RunConfig out = config;
        if (!configFile.empty()) {
            out = run_config_from_json_file(configFile);
            auto keep = [&](const char* flag, auto member) {
                if (cmd->count(flag) > 0)
                    out.*member = config.*member;
            };
            keep("--k", &RunConfig::k);
            keep("--l", &RunConfig::l);
            keep("--seed", &RunConfig::seed);
            keep("--ridge", &RunConfig::ridge);
            keep("--gap-tol", &RunConfig::gap_tol);
            keep("--refresh-every", &RunConfig::refresh_every);
            keep("--refresh-residual", &RunConfig::refresh_residual);
            keep("--threads", &RunConfig::threads);
        }
        return out;
    }
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void write_run_outputs(const std::string& outDir, const EmbeddingRun& run, bool diagnostics) {
    ensure_dir(outDir);
    write_embedding_tsv(join(outDir, "embedding.tsv"), run.embedding.y);
    write_embedding_sidecar(join(outDir, "embedding.json"), run.projection, run.config,
                            run.step);
    save_checkpoint(join(outDir, "checkpoint.json"), run);
    if (diagnostics)
        write_diagnostics(join(outDir, "diagnostics.json"), run);
}

int cmd_embed(const std::string& graphFile, const std::string& attrFile,
              const ConfigFlags& flags, const CLI::App* cmd, const std::string& outDir,
              bool diagnostics) {
    const RunConfig config = flags.resolve(cmd);
    Snapshot snapshot = load_snapshot(graphFile, attrFile);
    EmbeddingRun run;
    try {
        run = init_offline(std::move(snapshot), config);
    } catch (const NumericError& e) {
        throw NumericError(std::string("offline initialization: ") + e.what());
    }
    write_run_outputs(outDir, run, diagnostics);
    std::cout << "embedded " << run.snapshot.n << " nodes -> " << join(outDir, "embedding.tsv")
              << "\n";
    return kExitOk;
}

int cmd_update(const std::string& checkpointFile, const std::string& deltaEdges,
               const std::string& deltaAttrs, const std::string& outDir, bool diagnostics) {
    EmbeddingRun run = load_checkpoint(checkpointFile);
    Delta delta = load_delta(deltaEdges, deltaAttrs, run.snapshot.n, run.snapshot.d);
    EmbeddingRun next;
    try {
        next = step_online(run, delta);
    } catch (const NumericError& e) {
        throw NumericError(std::string("online update: ") + e.what());
    }
    write_run_outputs(outDir, next, diagnostics);
    std::cout << "step " << next.step << " refresh: "
              << (next.refresh_fired() ? next.drift.last_refresh_reason : "none") << "\n";
    return kExitOk;
}

std::vector<MetricRow> eval_embedding(const Mat& y, const std::vector<int>& labels,
                                      const std::string& task, int clusters, int restarts,
                                      int folds, std::uint64_t seed, int dim, int step) {
    std::vector<MetricRow> rows;
    if (task == "cluster") {
        const auto assignments = kmeans(y, clusters, restarts, seed);
        const auto m = clustering_metrics(assignments, labels);
        rows.push_back({"cluster", "acc", m.acc, dim, step});
        rows.push_back({"cluster", "nmi", m.nmi, dim, step});
    } else {
        const auto data = LabeledEmbedding::make(y, labels);
        const auto m = train_eval_classifier(data, folds, seed);
        rows.push_back({"classify", "accuracy", m.accuracy, dim, step});
        rows.push_back({"classify", "micro_f1", m.micro_f1, dim, step});
        rows.push_back({"classify", "macro_f1", m.macro_f1, dim, step});
    }
    return rows;
}

int cmd_eval(const std::string& embeddingFile, const std::string& labelsFile,
             const std::string& task, int clusters, int restarts, int folds,
             std::uint64_t seed, bool dimsSweep, const std::string& checkpointFile,
             const std::string& outDir) {
    ensure_dir(outDir);
    std::vector<MetricRow> rows;
    if (dimsSweep) {
        if (checkpointFile.empty())
            throw Error("--dims-sweep requires --checkpoint to re-fuse projections");
        EmbeddingRun run = load_checkpoint(checkpointFile);
        const std::vector<int> labels = read_labels(labelsFile, run.snapshot.n);
        const Mat ya = embedding_matrix(run.net);
        const Mat yx = embedding_matrix(run.attr);
        const int c = clusters > 0 ? clusters
                                   : 1 + *std::max_element(labels.begin(), labels.end());
        for (int l = 10; l <= 100; l += 10) {
            if (l > 2 * run.config.k)
                break;
            auto [proj, emb] = fuse(ya, yx, l, run.config.ridge);
            auto part = eval_embedding(emb.y, labels, task, c, restarts, folds, seed, l,
                                       run.step);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        if (rows.empty())
            throw Error("--dims-sweep found no dimension <= 2k to evaluate");
    } else {
        const Mat y = read_embedding_tsv(embeddingFile);
        const std::vector<int> labels = read_labels(labelsFile, y.rows());
        const int c = clusters > 0 ? clusters
                                   : 1 + *std::max_element(labels.begin(), labels.end());
        rows = eval_embedding(y, labels, task, c, restarts, folds, seed,
                              static_cast<int>(y.cols()), 0);
    }
    write_metrics_csv(join(outDir, "metrics.csv"), rows);
    write_metrics_json(join(outDir, "metrics.json"), rows);
    for (const auto& r : rows)
        std::cout << r.task << " " << r.metric << " (dim " << r.dim << ") = " << r.value
                  << "\n";
    return kExitOk;
}

int cmd_synth(const std::string& specFile, const std::string& outDir) {
    const SbmSpec spec = sbm_spec_from_json_file(specFile);
    const SynthData data = generate(spec);
    ensure_dir(outDir);
    write_edge_file(join(outDir, "edges.tsv"), data.snapshot.adjacency);
    write_attr_file(join(outDir, "attrs.tsv"), data.snapshot.attributes);
    write_labels(join(outDir, "labels.tsv"), data.labels);

    std::vector<ManifestEntry> entries;
    char name[64];
    for (std::size_t t = 0; t < data.deltas.size(); ++t) {
        ManifestEntry e;
        std::snprintf(name, sizeof(name), "delta_edges_%03zu.tsv", t);
        e.edges = name;
        write_edge_file(join(outDir, e.edges), data.deltas[t].adj, /*as_delta=*/true);
        std::snprintf(name, sizeof(name), "delta_attrs_%03zu.tsv", t);
        e.attrs = name;
        write_attr_file(join(outDir, e.attrs), data.deltas[t].attr, /*as_delta=*/true);
        entries.push_back(std::move(e));
    }
    write_manifest(join(outDir, "manifest.json"), "edges.tsv", "attrs.tsv", "labels.tsv",
                   entries);
    std::cout << "wrote " << data.snapshot.n << " nodes, " << data.deltas.size()
              << " deltas -> " << outDir << "\n";
    return kExitOk;
}

int cmd_bench(const std::string& specFile, const ConfigFlags& flags, const CLI::App* cmd,
              const std::string& mode, const std::string& csvPath) {
    const SbmSpec spec = sbm_spec_from_json_file(specFile);
    const RunConfig config = flags.resolve(cmd);
    std::vector<BenchRow> rows;
    auto runMode = [&](BenchMode m) {
        auto part = run_benchmark(spec, config, m);
        std::cout << to_string(m) << " cumulative: " << cumulative_seconds(part) << " s\n";
        rows.insert(rows.end(), part.begin(), part.end());
        return cumulative_seconds(part);
    };
    double online = 0.0, offline = 0.0;
    if (mode == "online" || mode == "both")
        online = runMode(BenchMode::online);
    if (mode == "offline" || mode == "both")
        offline = runMode(BenchMode::offline);
    if (mode == "both" && online > 0.0)
        std::cout << "speedup: " << offline / online << "x\n";
    if (!csvPath.empty())
        append_benchmark_csv(csvPath, rows);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"consensus spectral embeddings of attributed networks, maintained "
                 "incrementally via eigen-pair perturbation updates"};
    app.require_subcommand(0, 1);
    bool showConfig = false;
    app.add_flag("--show-config", showConfig, "print the default configuration and exit");

    // embed
    auto* embed = app.add_subcommand("embed", "offline embedding of one snapshot");
    std::string graphFile, attrFile, outDir = "out";
    bool diagnostics = false;
    ConfigFlags embedFlags;
    embed->add_option("--graph", graphFile, "edge list TSV")->required();
    embed->add_option("--attrs", attrFile, "attribute triplet TSV")->required();
    embed->add_option("--out", outDir, "output directory");
    embed->add_flag("--diagnostics", diagnostics, "write diagnostics.json");
    embedFlags.attach(embed);

    // update
    auto* update = app.add_subcommand("update", "advance a checkpoint by one delta");
    std::string checkpointFile, deltaEdges, deltaAttrs, updateOut = "out";
    bool updateDiagnostics = false;
    update->add_option("--checkpoint", checkpointFile, "checkpoint.json to load")->required();
    update->add_option("--delta-edges", deltaEdges, "#delta edge file");
    update->add_option("--delta-attrs", deltaAttrs, "#delta attribute file");
    update->add_option("--out", updateOut, "output directory");
    update->add_flag("--diagnostics", updateDiagnostics, "write diagnostics.json");

    // eval
    auto* eval = app.add_subcommand("eval", "downstream clustering / classification metrics");
    std::string embeddingFile, labelsFile, task = "cluster", evalOut = "out",
                evalCheckpoint;
    int clusters = 0, restarts = 10, folds = 10;
    std::uint64_t evalSeed = 0;
    bool dimsSweep = false;
    eval->add_option("--embedding", embeddingFile, "embedding TSV");
    eval->add_option("--labels", labelsFile, "labels TSV")->required();
    eval->add_option("--task", task, "cluster | classify")
        ->check(CLI::IsMember({"cluster", "classify"}));
    eval->add_option("--clusters", clusters, "cluster count (default: #classes)");
    eval->add_option("--restarts", restarts, "k-means restarts");
    eval->add_option("--folds", folds, "cross-validation folds");
    eval->add_option("--seed", evalSeed, "random seed");
    eval->add_flag("--dims-sweep", dimsSweep, "sweep l in {10,...,100}, re-fusing");
    eval->add_option("--checkpoint", evalCheckpoint, "checkpoint for --dims-sweep");
    eval->add_option("--out", evalOut, "output directory");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dynamic network");
    std::string synthSpec, synthOut = "synth";
    synth->add_option("--spec", synthSpec, "SBM spec JSON")->required();
    synth->add_option("--out", synthOut, "output directory");

    // bench
    auto* bench = app.add_subcommand("bench", "online vs offline timing harness");
    std::string benchSpec, benchMode = "both", benchCsv;
    ConfigFlags benchFlags;
    bench->add_option("--spec", benchSpec, "SBM spec JSON")->required();
    bench->add_option("--mode", benchMode, "online | offline | both")
        ->check(CLI::IsMember({"online", "offline", "both"}));
    bench->add_option("--csv", benchCsv, "append timing rows to this CSV");
    benchFlags.attach(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitParse;
    }

    try {
        if (showConfig) {
            std::cout << run_config_to_json(RunConfig{}) << "\n"
                      << sbm_spec_to_json(SbmSpec{}) << "\n";
            return kExitOk;
        }
        if (embed->parsed())
            return cmd_embed(graphFile, attrFile, embedFlags, embed, outDir, diagnostics);
        if (update->parsed())
            return cmd_update(checkpointFile, deltaEdges, deltaAttrs, updateOut,
                              updateDiagnostics);
        if (eval->parsed()) {
            if (!dimsSweep && embeddingFile.empty())
                throw Error("eval requires --embedding (or --dims-sweep with --checkpoint)");
            return cmd_eval(embeddingFile, labelsFile, task, clusters, restarts, folds,
                            evalSeed, dimsSweep, evalCheckpoint, evalOut);
        }
        if (synth->parsed())
            return cmd_synth(synthSpec, synthOut);
        if (bench->parsed())
            return cmd_bench(benchSpec, benchFlags, bench, benchMode, benchCsv);
        std::cout << app.help();
        return kExitOk;
    } catch (const StaleCheckpoint& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStale;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
}
