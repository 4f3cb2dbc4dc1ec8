#include "h2x/mlp.hpp"

namespace h2x {

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "silu") return Activation::Silu;
    throw std::runtime_error("unknown activation: " + name);
}

std::string to_string(Activation a) {
    switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Silu: return "silu";
    }
    return "tanh";
}

std::size_t param_count(const std::vector<int>& sizes) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        n += static_cast<std::size_t>(sizes[l + 1]) *
                 static_cast<std::size_t>(sizes[l]) +
             static_cast<std::size_t>(sizes[l + 1]);
    }
    return n;
}

Gradients make_gradients(const Mlp& m) {
    Gradients g;
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        g.weights.push_back(Matrix::Zero(m.weights[l].rows(), m.weights[l].cols()));
        g.biases.push_back(Vector::Zero(m.biases[l].size()));
    }
    return g;
}

Mlp init_mlp(std::uint64_t seed, const std::vector<int>& sizes, Activation activation) {
    if (sizes.size() < 2) {
        throw std::invalid_argument("init_mlp: need at least input and output layer");
    }
    for (int s : sizes) {
        if (s < 1) throw std::invalid_argument("init_mlp: layer sizes must be >= 1");
    }
    Mlp m;
    m.layer_sizes = sizes;
    m.activation = activation;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) {
                w(r, c) = rng.uniform(-bound, bound);
            }
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(Vector::Zero(fan_out));
    }
    return m;
}

namespace {

void apply_activation(Matrix& z, Activation a) {
    switch (a) {
    case Activation::Tanh:
        z = z.array().tanh().matrix();
        break;
    case Activation::Relu:
        z = z.array().max(0.0).matrix();
        break;
    case Activation::Silu:
        z = (z.array() / (1.0 + (-z.array()).exp())).matrix();
        break;
    }
}

/// Derivative expressed through pre-activation z and post-activation a.
Matrix activation_derivative(const Matrix& z, const Matrix& a, Activation act) {
    switch (act) {
    case Activation::Tanh:
        return (1.0 - a.array().square()).matrix();
    case Activation::Relu:
        return (z.array() > 0.0).cast<double>().matrix();
    case Activation::Silu: {
        const auto sig = 1.0 / (1.0 + (-z.array()).exp());
        return (sig * (1.0 + z.array() * (1.0 - sig))).matrix();
    }
    }
    return Matrix::Ones(z.rows(), z.cols());
}

} // namespace

Vector batch_forward(const Mlp& m, const Matrix& inputs) {
    if (inputs.cols() != m.input_size()) {
        throw std::invalid_argument("batch_forward: feature count mismatch");
    }
    Matrix a = inputs;
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        Matrix z = (a * m.weights[l].transpose()).rowwise() + m.biases[l].transpose();
        if (l + 1 < m.layer_count()) apply_activation(z, m.activation);
        a = std::move(z);
    }
    return a.col(0);
}

ForwardCache batch_forward_cached(const Mlp& m, const Matrix& inputs) {
    if (inputs.cols() != m.input_size()) {
        throw std::invalid_argument("batch_forward_cached: feature count mismatch");
    }
    ForwardCache cache;
    cache.inputs = inputs;
    Matrix a = inputs;
    for (std::size_t l = 0; l + 1 < m.layer_count(); ++l) {
        Matrix z = (a * m.weights[l].transpose()).rowwise() + m.biases[l].transpose();
        apply_activation(z, m.activation);
        cache.activations.push_back(z);
        a = std::move(z);
    }
    const std::size_t last = m.layer_count() - 1;
    cache.outputs =
        ((a * m.weights[last].transpose()).rowwise() + m.biases[last].transpose()).col(0);
    return cache;
}

Gradients batch_backward(const Mlp& m, const ForwardCache& cache, const Vector& upstream) {
    if (upstream.size() != cache.outputs.size()) {
        throw std::invalid_argument("batch_backward: upstream size mismatch");
    }
    Gradients g = make_gradients(m);
    const std::size_t layers = m.layer_count();

    // delta starts as dL/d(output) per sample, then walks backwards.
    Matrix delta = upstream;  // n x 1
    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& below =
            l == 0 ? cache.inputs : cache.activations[l - 1];  // n x in
        g.weights[l] = delta.transpose() * below;
        g.biases[l] = delta.colwise().sum().transpose();
        if (l == 0) break;
        Matrix da = delta * m.weights[l];  // n x in
        // Recover pre-activation for relu/silu; tanh only needs the activation.
        if (m.activation == Activation::Tanh) {
            delta = (da.array() *
                     (1.0 - cache.activations[l - 1].array().square()))
                        .matrix();
        } else {
            const Matrix& prev =
                l >= 2 ? cache.activations[l - 2] : cache.inputs;
            Matrix z = (prev * m.weights[l - 1].transpose()).rowwise() +
                       m.biases[l - 1].transpose();
            delta =
                (da.array() *
                 activation_derivative(z, cache.activations[l - 1], m.activation).array())
                    .matrix();
        }
    }
    return g;
}

Gradients backward(const Mlp& m, const Vector& x, double upstream) {
    Matrix inputs = x.transpose();
    ForwardCache cache = batch_forward_cached(m, inputs);
    Vector u(1);
    u(0) = upstream;
    return batch_backward(m, cache, u);
}

} // namespace h2x
