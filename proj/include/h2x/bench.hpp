#pragma once

#include "h2x/fusion.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace h2x {

enum class BenchMode { Single, Batch100 };

BenchMode bench_mode_from_string(const std::string& name);
std::string to_string(BenchMode mode);

struct BenchOptions {
    BenchMode mode = BenchMode::Single;
    int n_total = 1000;
    int n_warmup = 100;
    bool use_float32 = false;  ///< run the forward pass in single precision
    std::uint64_t seed = 99;
};

/// Latency statistics over the retained (post-warm-up) calls, microseconds.
struct BenchReport {
    BenchMode mode;
    int n_total;
    int n_warmup;
    int retained;
    bool float32;
    double mean_us;
    double std_us;
    double p50_us;
    double p95_us;
    double p99_us;
    double total_us;  ///< sum over retained calls
};

/// Times n_total forward passes on pre-generated random valid inputs with a
/// monotonic high-resolution clock, discarding the first n_warmup. Single
/// mode times one-point inference; Batch100 times 100-row batched calls.
BenchReport bench(const Predictor& model, const BenchOptions& opts);

} // namespace h2x
