#pragma once

#include "dyne/bench.hpp"
#include "dyne/pipeline.hpp"
#include "dyne/snapshot.hpp"
#include "dyne/synth.hpp"

#include <string>
#include <vector>

namespace dyne {

// ---------------------------------------------------------------------------
// TSV formats. All files are UTF-8; lines starting with '#' are comments.
// Edge list:   src <TAB> dst <TAB> weight, 0-based ids, each undirected edge
//              listed once.
// Attributes:  node <TAB> attr <TAB> value triplets.
// Deltas:      the same formats with a first line "#delta"; values may be
//              negative.
// Labels:      node <TAB> class.
// ---------------------------------------------------------------------------

/// Reads an edge list into a symmetric matrix. n < 0 infers the node count
/// from the largest id. expect_delta selects the "#delta"-marked variant
/// (negative weights allowed). Throws ParseError with the offending line.
SpMat read_edge_file(const std::string& path, Index n = -1, bool expect_delta = false);

/// Reads attribute triplets. n / d < 0 infer sizes from the largest ids.
SpMat read_attr_file(const std::string& path, Index n = -1, Index d = -1,
                     bool expect_delta = false);

std::vector<int> read_labels(const std::string& path, Index n = -1);

/// Loads a snapshot from a base edge file plus attribute file; node count is
/// the larger of the two inferred sizes.
Snapshot load_snapshot(const std::string& edgePath, const std::string& attrPath);

/// Loads a delta; either path may be empty for "no change on that side".
Delta load_delta(const std::string& edgeDeltaPath, const std::string& attrDeltaPath, Index n,
                 Index d);

void write_edge_file(const std::string& path, const SpMat& adjacency, bool as_delta = false);
void write_attr_file(const std::string& path, const SpMat& attributes, bool as_delta = false);
void write_labels(const std::string& path, const std::vector<int>& labels);

void write_embedding_tsv(const std::string& path, const Mat& y);
Mat read_embedding_tsv(const std::string& path);

/// JSON sidecar next to an embedding: gamma spectrum plus run parameters.
void write_embedding_sidecar(const std::string& path, const ConsensusProjection& projection,
                             const RunConfig& config, int step);

struct MetricRow {
    std::string task;
    std::string metric;
    double value = 0.0;
    int dim = 0;
    int step = 0;
};

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows);
void write_metrics_json(const std::string& path, const std::vector<MetricRow>& rows);

/// Solver statistics, drift counters, and the latest perturbation reports.
void write_diagnostics(const std::string& path, const EmbeddingRun& run);

// ---------------------------------------------------------------------------
// Checkpoints: versioned JSON containers with the config, step counter, full
// snapshot plus content digests, both spectral states, the projection, and
// drift statistics. The attribute similarity graph is rebuilt on load, which
// reproduces the in-memory matrix exactly.
// ---------------------------------------------------------------------------

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const EmbeddingRun& run);

/// Throws StaleCheckpoint on a version mismatch and Error when a stored
/// digest does not match the payload.
EmbeddingRun load_checkpoint(const std::string& path);

/// Manifest listing delta files in replay order.
struct ManifestEntry {
    std::string edges; // may be empty
    std::string attrs; // may be empty
};

void write_manifest(const std::string& path, const std::string& edgeFile,
                    const std::string& attrFile, const std::string& labelFile,
                    const std::vector<ManifestEntry>& deltas);
std::vector<ManifestEntry> read_manifest(const std::string& path);

// JSON config helpers (flags > config file > defaults is the CLI's job; these
// just parse/print).
RunConfig run_config_from_json(const std::string& text);
RunConfig run_config_from_json_file(const std::string& path);
std::string run_config_to_json(const RunConfig& config);

SbmSpec sbm_spec_from_json_file(const std::string& path);
std::string sbm_spec_to_json(const SbmSpec& spec);

} // namespace dyne
