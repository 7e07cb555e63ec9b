#include "dyne/io.hpp"

#include "dyne/similarity.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace dyne {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open file: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open file for writing: " + path);
    return out;
}

struct TsvReader {
    std::string path;
    std::ifstream in;
    long lineNo = 0;
    bool sawDeltaMark = false;

    explicit TsvReader(const std::string& p) : path(p), in(open_in(p)) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path + ":" + std::to_string(lineNo) + ": " + what);
    }

    // next data line split into fields; empty vector at end of file
    std::vector<std::string> next() {
        std::string line;
        while (std::getline(in, line)) {
            ++lineNo;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            std::size_t start = line.find_first_not_of(" \t");
            if (start == std::string::npos)
                continue;
            if (line[start] == '#') {
                if (line.compare(start, 6, "#delta") == 0)
                    sawDeltaMark = true;
                continue;
            }
            std::vector<std::string> fields;
            std::istringstream ss(line);
            std::string f;
            while (ss >> f)
                fields.push_back(f);
            return fields;
        }
        return {};
    }

    long parse_index(const std::string& s) {
        try {
            std::size_t used = 0;
            const long v = std::stol(s, &used);
            if (used != s.size() || v < 0)
                fail("expected a non-negative integer, got '" + s + "'");
            return v;
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            fail("expected a non-negative integer, got '" + s + "'");
        }
    }

    double parse_value(const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size() || !std::isfinite(v))
                fail("expected a finite number, got '" + s + "'");
            return v;
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            fail("expected a finite number, got '" + s + "'");
        }
    }
};

struct TripletFile {
    std::vector<Triplet> entries;
    Index maxRow = -1;
    Index maxCol = -1;
};

TripletFile read_triplets(TsvReader& reader, bool expect_delta, bool symmetric_pairs) {
    TripletFile out;
    std::set<std::pair<Index, Index>> seen;
    for (;;) {
        const auto fields = reader.next();
        if (fields.empty())
            break;
        if (!reader.sawDeltaMark && expect_delta)
            reader.fail("expected a '#delta' marker before data");
        if (fields.size() != 3)
            reader.fail("expected 3 fields, got " + std::to_string(fields.size()));
        const Index a = reader.parse_index(fields[0]);
        const Index b = reader.parse_index(fields[1]);
        const double v = reader.parse_value(fields[2]);
        if (symmetric_pairs) {
            if (a == b)
                reader.fail("self-loop on node " + std::to_string(a));
            const std::pair<Index, Index> key = std::minmax(a, b);
            if (!seen.insert(key).second)
                reader.fail("duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
            if (!expect_delta && v < 0.0)
                reader.fail("negative weight in a base file");
            out.entries.emplace_back(a, b, v);
            out.entries.emplace_back(b, a, v);
        } else {
            if (!seen.emplace(a, b).second)
                reader.fail("duplicate entry " + std::to_string(a) + "," + std::to_string(b));
            if (!expect_delta && v < 0.0)
                reader.fail("negative value in a base file");
            out.entries.emplace_back(a, b, v);
        }
        out.maxRow = std::max(out.maxRow, std::max(a, symmetric_pairs ? b : a));
        out.maxCol = std::max(out.maxCol, b);
    }
    if (reader.sawDeltaMark && !expect_delta)
        reader.fail("file is marked '#delta' but a base file was expected");
    if (expect_delta && !reader.sawDeltaMark && !out.entries.empty())
        reader.fail("expected a '#delta' marker");
    return out;
}

} // namespace

SpMat read_edge_file(const std::string& path, Index n, bool expect_delta) {
    TsvReader reader(path);
    TripletFile f = read_triplets(reader, expect_delta, /*symmetric_pairs=*/true);
    const Index size = n >= 0 ? n : f.maxRow + 1;
    if (f.maxRow >= size)
        throw ParseError(path + ": node id " + std::to_string(f.maxRow) +
                         " out of range for n = " + std::to_string(size));
    SpMat m(size, size);
    m.setFromTriplets(f.entries.begin(), f.entries.end());
    m.makeCompressed();
    return m;
}

SpMat read_attr_file(const std::string& path, Index n, Index d, bool expect_delta) {
    TsvReader reader(path);
    TripletFile f = read_triplets(reader, expect_delta, /*symmetric_pairs=*/false);
    const Index rows = n >= 0 ? n : f.maxRow + 1;
    const Index cols = d >= 0 ? d : f.maxCol + 1;
    if (f.maxRow >= rows || f.maxCol >= cols)
        throw ParseError(path + ": entry out of range for " + std::to_string(rows) + " x " +
                         std::to_string(cols));
    SpMat m(rows, cols);
    m.setFromTriplets(f.entries.begin(), f.entries.end());
    m.makeCompressed();
    return m;
}

std::vector<int> read_labels(const std::string& path, Index n) {
    TsvReader reader(path);
    std::vector<std::pair<Index, int>> pairs;
    Index maxNode = -1;
    for (;;) {
        const auto fields = reader.next();
        if (fields.empty())
            break;
        if (fields.size() != 2)
            reader.fail("expected 2 fields, got " + std::to_string(fields.size()));
        const Index node = reader.parse_index(fields[0]);
        const long cls = reader.parse_index(fields[1]);
        pairs.emplace_back(node, static_cast<int>(cls));
        maxNode = std::max(maxNode, node);
    }
    const Index size = n >= 0 ? n : maxNode + 1;
    if (maxNode >= size)
        throw ParseError(path + ": node id out of range");
    std::vector<int> labels(size, -1);
    for (const auto& [node, cls] : pairs) {
        if (labels[node] >= 0)
            throw ParseError(path + ": duplicate label for node " + std::to_string(node));
        labels[node] = cls;
    }
    for (Index i = 0; i < size; ++i)
        if (labels[i] < 0)
            throw ParseError(path + ": missing label for node " + std::to_string(i));
    return labels;
}

Snapshot load_snapshot(const std::string& edgePath, const std::string& attrPath) {
    SpMat edges = read_edge_file(edgePath);
    SpMat attrs = read_attr_file(attrPath);
    const Index n = std::max(edges.rows(), attrs.rows());
    if (edges.rows() < n) {
        SpMat grown(n, n);
        std::vector<Triplet> trip;
        for (Index col = 0; col < edges.outerSize(); ++col)
            for (SpMat::InnerIterator it(edges, col); it; ++it)
                trip.emplace_back(it.row(), col, it.value());
        grown.setFromTriplets(trip.begin(), trip.end());
        edges = std::move(grown);
    }
    if (attrs.rows() < n)
        attrs.conservativeResize(n, attrs.cols());
    return Snapshot::make(std::move(edges), std::move(attrs));
}

Delta load_delta(const std::string& edgeDeltaPath, const std::string& attrDeltaPath, Index n,
                 Index d) {
    SpMat adj(n, n), attr(n, d);
    if (!edgeDeltaPath.empty())
        adj = read_edge_file(edgeDeltaPath, n, /*expect_delta=*/true);
    if (!attrDeltaPath.empty())
        attr = read_attr_file(attrDeltaPath, n, d, /*expect_delta=*/true);
    return Delta::make(std::move(adj), std::move(attr));
}

void write_edge_file(const std::string& path, const SpMat& adjacency, bool as_delta) {
    auto out = open_out(path);
    if (as_delta)
        out << "#delta\n";
    for (Index col = 0; col < adjacency.outerSize(); ++col)
        for (SpMat::InnerIterator it(adjacency, col); it; ++it)
            if (it.row() < col)
                out << it.row() << '\t' << col << '\t' << fmt_double(it.value()) << '\n';
}

void write_attr_file(const std::string& path, const SpMat& attributes, bool as_delta) {
    auto out = open_out(path);
    if (as_delta)
        out << "#delta\n";
    for (Index col = 0; col < attributes.outerSize(); ++col)
        for (SpMat::InnerIterator it(attributes, col); it; ++it)
            out << it.row() << '\t' << col << '\t' << fmt_double(it.value()) << '\n';
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << i << '\t' << labels[i] << '\n';
}

void write_embedding_tsv(const std::string& path, const Mat& y) {
    auto out = open_out(path);
    for (Index i = 0; i < y.rows(); ++i) {
        out << i;
        for (Index j = 0; j < y.cols(); ++j)
            out << '\t' << fmt_double(y(i, j));
        out << '\n';
    }
}

Mat read_embedding_tsv(const std::string& path) {
    TsvReader reader(path);
    std::vector<std::vector<double>> rows;
    Index cols = -1;
    for (;;) {
        const auto fields = reader.next();
        if (fields.empty())
            break;
        if (fields.size() < 2)
            reader.fail("embedding row needs a node id and at least one value");
        const Index node = reader.parse_index(fields[0]);
        if (node != static_cast<Index>(rows.size()))
            reader.fail("embedding rows must be consecutive node ids");
        std::vector<double> v;
        for (std::size_t j = 1; j < fields.size(); ++j)
            v.push_back(reader.parse_value(fields[j]));
        if (cols < 0)
            cols = static_cast<Index>(v.size());
        else if (cols != static_cast<Index>(v.size()))
            reader.fail("inconsistent embedding width");
        rows.push_back(std::move(v));
    }
    if (rows.empty())
        throw ParseError(path + ": empty embedding");
    Mat y(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Index j = 0; j < cols; ++j)
            y(static_cast<Index>(i), j) = rows[i][j];
    return y;
}

namespace {

json config_to_json_obj(const RunConfig& c) {
    return json{{"k", c.k},
                {"l", c.l},
                {"gap_tol", c.gap_tol},
                {"ridge", c.ridge},
                {"refresh_every", c.refresh_every},
                {"refresh_residual", c.refresh_residual},
                {"seed", c.seed},
                {"threads", c.threads}};
}

RunConfig config_from_json_obj(const json& j) {
    RunConfig c;
    c.k = j.value("k", c.k);
    c.l = j.value("l", c.l);
    c.gap_tol = j.value("gap_tol", c.gap_tol);
    c.ridge = j.value("ridge", c.ridge);
    c.refresh_every = j.value("refresh_every", c.refresh_every);
    c.refresh_residual = j.value("refresh_residual", c.refresh_residual);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    return c;
}

json sparse_to_json(const SpMat& m) {
    json entries = json::array();
    for (Index col = 0; col < m.outerSize(); ++col)
        for (SpMat::InnerIterator it(m, col); it; ++it)
            entries.push_back(json::array({it.row(), col, it.value()}));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

SpMat sparse_from_json(const json& j) {
    SpMat m(j.at("rows").get<Index>(), j.at("cols").get<Index>());
    std::vector<Triplet> trip;
    for (const auto& e : j.at("entries"))
        trip.emplace_back(e.at(0).get<Index>(), e.at(1).get<Index>(), e.at(2).get<double>());
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

std::string digest_sparse(const SpMat& m) {
    // FNV-1a over the canonical (row, col, value-bits) stream
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint64_t>(m.rows()));
    mix(static_cast<std::uint64_t>(m.cols()));
    for (Index col = 0; col < m.outerSize(); ++col)
        for (SpMat::InnerIterator it(m, col); it; ++it) {
            mix(static_cast<std::uint64_t>(it.row()));
            mix(static_cast<std::uint64_t>(col));
            std::uint64_t bits;
            const double v = it.value();
            static_assert(sizeof(bits) == sizeof(v));
            std::memcpy(&bits, &v, sizeof(bits));
            mix(bits);
        }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json vec_to_json(const Vec& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

Vec vec_from_json(const json& j) {
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Index>(i)] = j[i].get<double>();
    return v;
}

json state_to_json(const SpectralState& s) {
    json values = json::array();
    json vectors = json::array();
    for (const auto& p : s.pairs) {
        values.push_back(p.value);
        vectors.push_back(vec_to_json(p.vector));
    }
    return json{{"k", s.k},
                {"values", std::move(values)},
                {"vectors", std::move(vectors)},
                {"near_zero", s.stats.near_zero},
                {"max_residual", s.stats.max_residual}};
}

void state_from_json(const json& j, SpectralState& s) {
    s.k = j.at("k").get<int>();
    s.pairs.clear();
    const auto& values = j.at("values");
    const auto& vectors = j.at("vectors");
    for (std::size_t i = 0; i < values.size(); ++i) {
        EigenPair p;
        p.value = values[i].get<double>();
        p.vector = vec_from_json(vectors[i]);
        s.pairs.push_back(std::move(p));
    }
    s.stats.near_zero = j.value("near_zero", Index{0});
    s.stats.max_residual = j.value("max_residual", 0.0);
}

} // namespace

void write_embedding_sidecar(const std::string& path, const ConsensusProjection& projection,
                             const RunConfig& config, int step) {
    json j{{"gammas", vec_to_json(projection.gammas)},
           {"config", config_to_json_obj(config)},
           {"step", step},
           {"l", projection.gammas.size()}};
    open_out(path) << j.dump(2) << '\n';
}

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows) {
    auto out = open_out(path);
    out << "task,metric,value,dim,step\n";
    for (const auto& r : rows)
        out << r.task << ',' << r.metric << ',' << fmt_double(r.value) << ',' << r.dim << ','
            << r.step << '\n';
}

void write_metrics_json(const std::string& path, const std::vector<MetricRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back(json{{"task", r.task},
                           {"metric", r.metric},
                           {"value", r.value},
                           {"dim", r.dim},
                           {"step", r.step}});
    open_out(path) << arr.dump(2) << '\n';
}

namespace {

json report_to_json(const PerturbReport& r) {
    json pairs = json::array();
    for (const auto& p : r.pairs)
        pairs.push_back(json{{"delta_value", p.delta_value},
                             {"delta_vector_norm", p.delta_vector_norm},
                             {"residual", p.residual},
                             {"gap_margin", p.gap_margin},
                             {"flagged", p.flagged}});
    json alpha = json::array();
    for (Index i = 0; i < r.alpha.rows(); ++i)
        alpha.push_back(vec_to_json(Vec(r.alpha.row(i).transpose())));
    return json{{"pairs", std::move(pairs)},
                {"alpha", std::move(alpha)},
                {"flagged_count", r.flagged_count}};
}

json stats_to_json(const SolveStats& s) {
    return json{{"near_zero", s.near_zero},
                {"floored", s.floored},
                {"restarts", s.restarts},
                {"iterations", s.iterations},
                {"max_residual", s.max_residual}};
}

} // namespace

void write_diagnostics(const std::string& path, const EmbeddingRun& run) {
    json j{{"step", run.step},
           {"refresh_fired", run.refresh_fired()},
           {"net", json{{"solve", stats_to_json(run.net.stats)},
                        {"perturb", report_to_json(run.last_net_report)}}},
           {"attr", json{{"solve", stats_to_json(run.attr.stats)},
                         {"perturb", report_to_json(run.last_attr_report)}}},
           {"drift", json{{"net_residual", run.drift.net_residual},
                          {"attr_residual", run.drift.attr_residual},
                          {"cum_net_residual", run.drift.cum_net_residual},
                          {"cum_attr_residual", run.drift.cum_attr_residual},
                          {"net_flagged", run.drift.net_flagged},
                          {"attr_flagged", run.drift.attr_flagged},
                          {"refresh_count", run.drift.refresh_count},
                          {"last_refresh_step", run.drift.last_refresh_step},
                          {"last_refresh_reason", run.drift.last_refresh_reason}}}};
    open_out(path) << j.dump(2) << '\n';
}

void save_checkpoint(const std::string& path, const EmbeddingRun& run) {
    json j;
    j["version"] = kCheckpointVersion;
    j["step"] = run.step;
    j["config"] = config_to_json_obj(run.config);
    j["snapshot"] = json{{"n", run.snapshot.n},
                         {"d", run.snapshot.d},
                         {"adjacency", sparse_to_json(run.snapshot.adjacency)},
                         {"attributes", sparse_to_json(run.snapshot.attributes)}};
    j["digest"] = json{{"adjacency", digest_sparse(run.snapshot.adjacency)},
                       {"attributes", digest_sparse(run.snapshot.attributes)}};
    j["net"] = state_to_json(run.net);
    j["attr"] = state_to_json(run.attr);
    j["projection"] = json{{"gammas", vec_to_json(run.projection.gammas)},
                           {"p", [&] {
                                json cols = json::array();
                                for (Index c = 0; c < run.projection.p.cols(); ++c)
                                    cols.push_back(vec_to_json(run.projection.p.col(c)));
                                return cols;
                            }()}};
    j["drift"] = json{{"net_residual", run.drift.net_residual},
                      {"attr_residual", run.drift.attr_residual},
                      {"cum_net_residual", run.drift.cum_net_residual},
                      {"cum_attr_residual", run.drift.cum_attr_residual},
                      {"net_flagged", run.drift.net_flagged},
                      {"attr_flagged", run.drift.attr_flagged},
                      {"refresh_count", run.drift.refresh_count},
                      {"last_refresh_step", run.drift.last_refresh_step},
                      {"last_refresh_reason", run.drift.last_refresh_reason}};
    open_out(path) << j.dump() << '\n';
}

EmbeddingRun load_checkpoint(const std::string& path) {
    json j;
    try {
        j = json::parse(open_in(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion)
            throw StaleCheckpoint(path + ": checkpoint version " + std::to_string(version) +
                                  " is not supported (expected " +
                                  std::to_string(kCheckpointVersion) + ")");

        EmbeddingRun run;
        run.config = config_from_json_obj(j.at("config"));
        run.step = j.at("step").get<int>();

        SpMat adjacency = sparse_from_json(j.at("snapshot").at("adjacency"));
        SpMat attributes = sparse_from_json(j.at("snapshot").at("attributes"));
        if (digest_sparse(adjacency) != j.at("digest").at("adjacency").get<std::string>() ||
            digest_sparse(attributes) != j.at("digest").at("attributes").get<std::string>())
            throw Error(path + ": checkpoint digest mismatch");
        run.snapshot = Snapshot::make(std::move(adjacency), std::move(attributes));

        // rebuilt, not stored: identical to the matrix at save time because
        // similarity is a pure function of the attributes
        run.similarity = build_similarity(run.snapshot);
        state_from_json(j.at("net"), run.net);
        state_from_json(j.at("attr"), run.attr);
        run.net.lap = floor_degrees(build_laplacian(run.snapshot.adjacency));
        run.attr.lap = floor_degrees(build_laplacian(run.similarity.w));

        run.projection.gammas = vec_from_json(j.at("projection").at("gammas"));
        const auto& cols = j.at("projection").at("p");
        run.projection.p.resize(2 * run.config.k, static_cast<Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c)
            run.projection.p.col(static_cast<Index>(c)) = vec_from_json(cols[c]);

        run.embedding.y = embedding_matrix(run.net) * run.projection.p.topRows(run.config.k) +
                          embedding_matrix(run.attr) * run.projection.p.bottomRows(run.config.k);

        const auto& drift = j.at("drift");
        run.drift.net_residual = drift.value("net_residual", 0.0);
        run.drift.attr_residual = drift.value("attr_residual", 0.0);
        run.drift.cum_net_residual = drift.value("cum_net_residual", 0.0);
        run.drift.cum_attr_residual = drift.value("cum_attr_residual", 0.0);
        run.drift.net_flagged = drift.value("net_flagged", 0L);
        run.drift.attr_flagged = drift.value("attr_flagged", 0L);
        run.drift.refresh_count = drift.value("refresh_count", 0);
        run.drift.last_refresh_step = drift.value("last_refresh_step", 0);
        run.drift.last_refresh_reason = drift.value("last_refresh_reason", std::string("none"));
        return run;
    } catch (const json::exception& e) {
        throw ParseError(path + ": malformed checkpoint: " + e.what());
    }
}

void write_manifest(const std::string& path, const std::string& edgeFile,
                    const std::string& attrFile, const std::string& labelFile,
                    const std::vector<ManifestEntry>& deltas) {
    json arr = json::array();
    for (const auto& d : deltas)
        arr.push_back(json{{"edges", d.edges}, {"attrs", d.attrs}});
    json j{{"edges", edgeFile}, {"attrs", attrFile}, {"labels", labelFile},
           {"deltas", std::move(arr)}};
    open_out(path) << j.dump(2) << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    json j;
    try {
        j = json::parse(open_in(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    std::vector<ManifestEntry> out;
    for (const auto& d : j.at("deltas"))
        out.push_back({d.value("edges", std::string{}), d.value("attrs", std::string{})});
    return out;
}

RunConfig run_config_from_json(const std::string& text) {
    try {
        return config_from_json_obj(json::parse(text));
    } catch (const json::exception& e) {
        throw ParseError(std::string("config json: ") + e.what());
    }
}

RunConfig run_config_from_json_file(const std::string& path) {
    try {
        return config_from_json_obj(json::parse(open_in(path)));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string run_config_to_json(const RunConfig& config) {
    return config_to_json_obj(config).dump(2);
}

SbmSpec sbm_spec_from_json_file(const std::string& path) {
    json j;
    try {
        j = json::parse(open_in(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    SbmSpec s;
    s.n = j.value("n", s.n);
    s.blocks = j.value("blocks", s.blocks);
    s.p_in = j.value("p_in", s.p_in);
    s.p_out = j.value("p_out", s.p_out);
    s.attr_dim = j.value("attr_dim", s.attr_dim);
    s.attr_signal = j.value("attr_signal", s.attr_signal);
    s.drift_rate = j.value("drift_rate", s.drift_rate);
    s.steps = j.value("steps", s.steps);
    s.seed = j.value("seed", s.seed);
    return s;
}

std::string sbm_spec_to_json(const SbmSpec& s) {
    return json{{"n", s.n},
                {"blocks", s.blocks},
                {"p_in", s.p_in},
                {"p_out", s.p_out},
                {"attr_dim", s.attr_dim},
                {"attr_signal", s.attr_signal},
                {"drift_rate", s.drift_rate},
                {"steps", s.steps},
                {"seed", s.seed}}
        .dump(2);
}

} // namespace dyne
