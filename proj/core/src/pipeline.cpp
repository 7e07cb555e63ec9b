#include "dyne/pipeline.hpp"

#include <cmath>
#include <future>
#include <utility>

namespace dyne {

namespace {

constexpr double kDegreeFloor = 1e-8;

std::uint64_t attr_seed(std::uint64_t seed) {
    return seed ^ 0x9e3779b97f4a7c15ULL; // distinct deterministic stream
}

double residual_threshold(const RunConfig& config, const LaplacianPair& lap) {
    if (config.refresh_residual >= 0.0)
        return config.refresh_residual;
    // calibrated so a 0.1%-drift stream re-solves before the tracked
    // subspace wanders past ~0.15 rad at desk scale
    return 4.5e-4 * lap.laplacian.norm();
}

struct BranchUpdate {
    SpectralState state;
    PerturbReport report;
    SimilarityGraph similarity; // attribute branch only
};

} // namespace

void RunConfig::validate() const {
    if (k < 1)
        throw Error("config: k must be >= 1");
    if (l < 1 || l > 2 * k)
        throw Error("config: l must satisfy 1 <= l <= 2k");
    if (gap_tol <= 0.0)
        throw Error("config: gap_tol must be positive");
    if (refresh_every < 0)
        throw Error("config: refresh_every must be >= 0");
    if (threads < 1)
        throw Error("config: threads must be >= 1");
}

EmbeddingRun init_offline(Snapshot snapshot, RunConfig config) {
    config.validate();
    if (snapshot.d < 1)
        throw Error("pipeline requires at least one attribute");

    EmbeddingRun run;
    run.config = config;
    run.step = 0;
    run.similarity = build_similarity(snapshot);

    // snapshots and maintained similarity graphs are symmetric by
    // construction, so the unchecked builds apply
    const LaplacianPair lapNet =
        floor_degrees(laplacian_from_symmetric(snapshot.adjacency), kDegreeFloor);
    const LaplacianPair lapAttr =
        floor_degrees(laplacian_from_symmetric(run.similarity.w), kDegreeFloor);

    if (config.threads > 1) {
        auto netFut = std::async(std::launch::async,
                                 [&] { return solve_topk(lapNet, config.k, config.seed); });
        run.attr = solve_topk(lapAttr, config.k, attr_seed(config.seed));
        run.net = netFut.get();
    } else {
        run.net = solve_topk(lapNet, config.k, config.seed);
        run.attr = solve_topk(lapAttr, config.k, attr_seed(config.seed));
    }

    auto [proj, emb] =
        fuse(embedding_matrix(run.net), embedding_matrix(run.attr), config.l, config.ridge);
    run.projection = std::move(proj);
    run.embedding = std::move(emb);
    run.snapshot = std::move(snapshot);

    run.drift.net_residual = run.net.stats.max_residual;
    run.drift.attr_residual = run.attr.stats.max_residual;
    return run;
}

namespace {

EmbeddingRun refreshed(const EmbeddingRun& run, Snapshot newSnapshot, const std::string& reason) {
    EmbeddingRun out = init_offline(std::move(newSnapshot), run.config);
    out.step = run.step + 1;
    out.drift = run.drift;
    out.drift.net_residual = out.net.stats.max_residual;
    out.drift.attr_residual = out.attr.stats.max_residual;
    out.drift.cum_net_residual += out.drift.net_residual;
    out.drift.cum_attr_residual += out.drift.attr_residual;
    ++out.drift.refresh_count;
    out.drift.last_refresh_step = out.step;
    out.drift.last_refresh_reason = reason;
    return out;
}

} // namespace

EmbeddingRun step_online(const EmbeddingRun& run, const Delta& delta) {
    const RunConfig& config = run.config;
    Snapshot newSnapshot = apply_delta(run.snapshot, delta);

    if (config.refresh_every > 0 &&
        run.step + 1 - run.drift.last_refresh_step >= config.refresh_every)
        return refreshed(run, std::move(newSnapshot), "interval");

    const PerturbOptions perturbOptions{config.gap_tol};

    auto updateNet = [&]() -> BranchUpdate {
        LaplacianPair lapNew =
            floor_degrees(laplacian_from_symmetric(newSnapshot.adjacency), kDegreeFloor);
        const LaplacianDelta dl = delta_laplacian(run.net.lap, lapNew);
        auto [state, report] = update_state(run.net, dl, std::move(lapNew), perturbOptions);
        return {std::move(state), std::move(report), {}};
    };
    auto updateAttr = [&]() -> BranchUpdate {
        SimilarityUpdate sim = update_similarity(run.similarity, newSnapshot,
                                                 touched_attribute_rows(delta));
        LaplacianPair lapNew =
            floor_degrees(laplacian_from_symmetric(sim.graph.w), kDegreeFloor);
        // the similarity delta is already sparse; derive (dDeg, dLap) from it
        // instead of differencing two near-dense Laplacians
        const LaplacianDelta dl = laplacian_delta_from_base_change(sim.delta);
        auto [state, report] = update_state(run.attr, dl, std::move(lapNew), perturbOptions);
        return {std::move(state), std::move(report), std::move(sim.graph)};
    };

    BranchUpdate net, attr;
    try {
        if (config.threads > 1) {
            auto netFut = std::async(std::launch::async, updateNet);
            attr = updateAttr();
            net = netFut.get();
        } else {
            net = updateNet();
            attr = updateAttr();
        }
    } catch (const RefreshRequired&) {
        return refreshed(run, std::move(newSnapshot), "gap_guard");
    }

    if (net.report.max_residual() > residual_threshold(config, net.state.lap) ||
        attr.report.max_residual() > residual_threshold(config, attr.state.lap))
        return refreshed(run, std::move(newSnapshot), "residual");

    EmbeddingRun out;
    out.config = config;
    out.step = run.step + 1;
    out.similarity = std::move(attr.similarity);
    out.net = std::move(net.state);
    out.attr = std::move(attr.state);
    auto [proj, emb] =
        fuse(embedding_matrix(out.net), embedding_matrix(out.attr), config.l, config.ridge);
    out.projection = std::move(proj);
    out.embedding = std::move(emb);
    out.snapshot = std::move(newSnapshot);

    out.drift = run.drift;
    out.drift.net_residual = net.report.max_residual();
    out.drift.attr_residual = attr.report.max_residual();
    out.drift.cum_net_residual += out.drift.net_residual;
    out.drift.cum_attr_residual += out.drift.attr_residual;
    out.drift.net_flagged += net.report.flagged_count;
    out.drift.attr_flagged += attr.report.flagged_count;
    out.last_net_report = std::move(net.report);
    out.last_attr_report = std::move(attr.report);
    return out;
}

} // namespace dyne
