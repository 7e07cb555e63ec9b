#include "dyne/bench.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace dyne {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point from) {
    return std::chrono::duration<double>(Clock::now() - from).count();
}

} // namespace

const char* to_string(BenchMode mode) {
    return mode == BenchMode::online ? "online" : "offline";
}

std::vector<BenchRow> run_benchmark(const SbmSpec& spec, const RunConfig& config,
                                    BenchMode mode) {
    config.validate();
    SynthData data = generate(spec);

    // warm-up: one untimed full solve so allocators and caches settle
    (void)init_offline(data.snapshot, config);

    std::vector<BenchRow> rows;
    rows.reserve(data.deltas.size() + 1);
    auto record = [&](int step, double seconds) {
        rows.push_back({step, mode, config.k, config.l, spec.n, seconds});
    };

    if (mode == BenchMode::offline) {
        Snapshot current = data.snapshot;
        for (std::size_t t = 0; t <= data.deltas.size(); ++t) {
            const auto start = Clock::now();
            EmbeddingRun run = init_offline(current, config);
            record(static_cast<int>(t), elapsed_seconds(start));
            (void)run;
            if (t < data.deltas.size())
                current = apply_delta(current, data.deltas[t]);
        }
    } else {
        const auto start = Clock::now();
        EmbeddingRun run = init_offline(data.snapshot, config);
        record(0, elapsed_seconds(start));
        for (std::size_t t = 0; t < data.deltas.size(); ++t) {
            const auto stepStart = Clock::now();
            run = step_online(run, data.deltas[t]);
            record(static_cast<int>(t) + 1, elapsed_seconds(stepStart));
        }
    }
    return rows;
}

double cumulative_seconds(const std::vector<BenchRow>& rows) {
    double total = 0.0;
    for (const auto& r : rows)
        total += r.seconds;
    return total;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchRow>& rows, bool header) {
    if (header)
        out << "step,mode,k,l,n,seconds\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.9f", r.seconds);
        out << r.step << ',' << to_string(r.mode) << ',' << r.k << ',' << r.l << ',' << r.n
            << ',' << buf << '\n';
    }
}

void append_benchmark_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    bool needHeader = true;
    {
        std::ifstream probe(path);
        needHeader = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
    }
    std::ofstream out(path, std::ios::app);
    if (!out)
        throw Error("cannot open benchmark csv for append: " + path);
    write_benchmark_csv(out, rows, needHeader);
}

} // namespace dyne
