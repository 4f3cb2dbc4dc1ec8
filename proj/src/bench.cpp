#include "h2x/bench.hpp"

#include "h2x/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace h2x {

BenchMode bench_mode_from_string(const std::string& name) {
    if (name == "single") return BenchMode::Single;
    if (name == "batch100") return BenchMode::Batch100;
    throw std::runtime_error("unknown bench mode: " + name);
}

std::string to_string(BenchMode mode) {
    return mode == BenchMode::Single ? "single" : "batch100";
}

BenchReport bench(const Predictor& model, const BenchOptions& opts) {
    if (opts.n_warmup >= opts.n_total) {
        throw std::invalid_argument("bench: warm-up must be smaller than total calls");
    }
    const Mlp& net = model.is_ensemble() ? model.ensemble->members.front()
                                         : *model.single;
    const int batch_rows = opts.mode == BenchMode::Batch100 ? 100 : 1;

    // Inputs are prepared up front (normalized features are uniform in [0,1])
    // so the timed region contains only the forward pass.
    Rng rng(opts.seed);
    std::vector<Matrix> inputs(static_cast<std::size_t>(opts.n_total));
    for (auto& in : inputs) {
        in.resize(batch_rows, net.input_size());
        for (Eigen::Index r = 0; r < in.rows(); ++r) {
            for (Eigen::Index c = 0; c < in.cols(); ++c) {
                in(r, c) = rng.uniform();
            }
        }
    }

    MlpF net32;
    std::vector<Eigen::MatrixXf> inputs32;
    if (opts.use_float32) {
        net32 = net.cast<float>();
        inputs32.reserve(inputs.size());
        for (const auto& in : inputs) inputs32.push_back(in.cast<float>());
    }

    using Clock = std::chrono::steady_clock;
    std::vector<double> all_us(static_cast<std::size_t>(opts.n_total));
    volatile double sink = 0.0;  // keeps the calls from being optimized out
    for (int k = 0; k < opts.n_total; ++k) {
        const auto t0 = Clock::now();
        if (opts.use_float32) {
            Eigen::MatrixXf a = inputs32[static_cast<std::size_t>(k)];
            for (std::size_t l = 0; l < net32.layer_count(); ++l) {
                Eigen::MatrixXf z =
                    (a * net32.weights[l].transpose()).rowwise() +
                    net32.biases[l].transpose();
                if (l + 1 < net32.layer_count()) z = z.array().tanh().matrix();
                a = std::move(z);
            }
            sink = sink + static_cast<double>(a(0, 0));
        } else {
            const Vector out = batch_forward(net, inputs[static_cast<std::size_t>(k)]);
            sink = sink + out(0);
        }
        const auto t1 = Clock::now();
        all_us[static_cast<std::size_t>(k)] =
            std::chrono::duration<double, std::micro>(t1 - t0).count();
    }

    std::vector<double> retained(all_us.begin() + opts.n_warmup, all_us.end());
    std::sort(retained.begin(), retained.end());
    const auto n = static_cast<double>(retained.size());

    BenchReport report;
    report.mode = opts.mode;
    report.n_total = opts.n_total;
    report.n_warmup = opts.n_warmup;
    report.retained = static_cast<int>(retained.size());
    report.float32 = opts.use_float32;
    double sum = 0.0;
    for (double v : retained) sum += v;
    report.mean_us = sum / n;
    double sq = 0.0;
    for (double v : retained) sq += (v - report.mean_us) * (v - report.mean_us);
    report.std_us = std::sqrt(sq / n);
    auto percentile = [&retained](double q) {
        const auto idx = static_cast<std::size_t>(
            std::ceil(q * static_cast<double>(retained.size())) - 1);
        return retained[std::min(idx, retained.size() - 1)];
    };
    report.p50_us = percentile(0.50);
    report.p95_us = percentile(0.95);
    report.p99_us = percentile(0.99);
    report.total_us = sum;
    return report;
}

} // namespace h2x
