#pragma once

#include "h2x/rng.hpp"
#include "h2x/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace h2x {

enum class Activation { Tanh, Relu, Silu };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

/// Dense feedforward network: hidden layers share one activation, the output
/// layer is linear (concentration regression in %). Templated on scalar so
/// the latency path can run in single precision; training always uses double.
template <typename Scalar>
struct MlpT {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    std::vector<int> layer_sizes;   ///< e.g. {8, 128, 128, 1}
    std::vector<Mat> weights;       ///< weights[l] maps layer l -> l+1, (out x in)
    std::vector<Vec> biases;
    Activation activation = Activation::Tanh;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            n += static_cast<std::size_t>(weights[l].size()) +
                 static_cast<std::size_t>(biases[l].size());
        }
        return n;
    }

    template <typename Target>
    MlpT<Target> cast() const {
        MlpT<Target> out;
        out.layer_sizes = layer_sizes;
        out.activation = activation;
        for (const auto& w : weights) out.weights.push_back(w.template cast<Target>());
        for (const auto& b : biases) out.biases.push_back(b.template cast<Target>());
        return out;
    }
};

using Mlp = MlpT<double>;
using MlpF = MlpT<float>;

/// Parameter count of a topology without building it.
std::size_t param_count(const std::vector<int>& sizes);

/// Parameter-shaped buffer for gradients and optimizer moments.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    void set_zero() {
        for (auto& w : weights) w.setZero();
        for (auto& b : biases) b.setZero();
    }
};

Gradients make_gradients(const Mlp& m);

/// Xavier-uniform weight init (U(+-sqrt(6/(fan_in+fan_out)))), zero biases;
/// fully determined by the seed.
Mlp init_mlp(std::uint64_t seed, const std::vector<int>& sizes,
             Activation activation = Activation::Tanh);

namespace detail {

template <typename Scalar>
Scalar activate(Scalar z, Activation a) {
    switch (a) {
    case Activation::Tanh: return std::tanh(z);
    case Activation::Relu: return z > Scalar(0) ? z : Scalar(0);
    case Activation::Silu: return z / (Scalar(1) + std::exp(-z));
    }
    return z;
}

} // namespace detail

/// Single-sample forward pass.
template <typename Scalar>
Scalar forward(const MlpT<Scalar>& m, const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& x) {
    if (x.size() != m.input_size()) {
        throw std::invalid_argument("forward: input size mismatch");
    }
    using Vec = typename MlpT<Scalar>::Vec;
    Vec a = x;
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        Vec z = m.weights[l] * a + m.biases[l];
        if (l + 1 < m.layer_count()) {
            for (Eigen::Index k = 0; k < z.size(); ++k) {
                z(k) = detail::activate(z(k), m.activation);
            }
        }
        a = std::move(z);
    }
    return a(0);
}

/// Cached activations of a batched forward pass (rows are samples).
struct ForwardCache {
    Matrix inputs;                    // n x in
    std::vector<Matrix> activations;  // post-activation per hidden layer
    Vector outputs;                   // n
};

/// Row-wise forward over a batch; identical values to per-row forward.
Vector batch_forward(const Mlp& m, const Matrix& inputs);

/// Batched forward that keeps activations for the backward pass.
ForwardCache batch_forward_cached(const Mlp& m, const Matrix& inputs);

/// Exact reverse-mode gradient of sum_k upstream(k) * output_k with respect
/// to every parameter, from a cached forward pass.
Gradients batch_backward(const Mlp& m, const ForwardCache& cache, const Vector& upstream);

/// Single-sample gradient of output * upstream w.r.t. every parameter.
Gradients backward(const Mlp& m, const Vector& x, double upstream);

} // namespace h2x
