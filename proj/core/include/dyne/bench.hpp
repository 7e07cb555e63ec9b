#pragma once

#include "dyne/pipeline.hpp"
#include "dyne/synth.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dyne {

enum class BenchMode { online, offline };

const char* to_string(BenchMode mode);

struct BenchRow {
    int step = 0;
    BenchMode mode = BenchMode::online;
    int k = 0;
    int l = 0;
    Index n = 0;
    double seconds = 0.0;
};

/// Times one full embedding stream over the generated deltas with a
/// monotonic clock, one untimed warm-up solve excluded. Offline mode re-runs
/// init_offline at every step; online mode initializes once and then calls
/// step_online. Data generation is untimed and identical for both modes of
/// the same spec.
std::vector<BenchRow> run_benchmark(const SbmSpec& spec, const RunConfig& config,
                                    BenchMode mode);

double cumulative_seconds(const std::vector<BenchRow>& rows);

/// CSV rows "step,mode,k,l,n,seconds". Appends to an existing file, writing
/// the header only when the file starts empty.
void append_benchmark_csv(const std::string& path, const std::vector<BenchRow>& rows);
void write_benchmark_csv(std::ostream& out, const std::vector<BenchRow>& rows, bool header);

} // namespace dyne
