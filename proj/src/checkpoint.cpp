#include "h2x/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace h2x {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json norm_to_json(const NormStats& stats) {
    json j;
    j["feature_min"] = std::vector<double>(stats.feature_min.data(),
                                           stats.feature_min.data() + kFeatureCount);
    j["feature_max"] = std::vector<double>(stats.feature_max.data(),
                                           stats.feature_max.data() + kFeatureCount);
    j["degenerate"] = std::vector<bool>(stats.degenerate.begin(), stats.degenerate.end());
    return j;
}

NormStats norm_from_json(const json& j) {
    NormStats stats;
    const auto mins = j.at("feature_min").get<std::vector<double>>();
    const auto maxs = j.at("feature_max").get<std::vector<double>>();
    const auto degen = j.at("degenerate").get<std::vector<bool>>();
    if (mins.size() != kFeatureCount || maxs.size() != kFeatureCount ||
        degen.size() != kFeatureCount) {
        throw std::runtime_error("checkpoint: normalization stats have wrong arity");
    }
    for (int f = 0; f < kFeatureCount; ++f) {
        stats.feature_min(f) = mins[f];
        stats.feature_max(f) = maxs[f];
        stats.degenerate[f] = degen[f];
    }
    return stats;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json j;
    j["format_version"] = kFormatVersion;
    j["layer_sizes"] = ckpt.model.layer_sizes;
    j["activation"] = to_string(ckpt.model.activation);

    // Parameters serialized row-major per layer.
    json weights = json::array();
    for (const auto& w : ckpt.model.weights) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(w.size()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                flat.push_back(w(r, c));
            }
        }
        weights.push_back(std::move(flat));
    }
    j["weights"] = std::move(weights);

    json biases = json::array();
    for (const auto& b : ckpt.model.biases) {
        biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    }
    j["biases"] = std::move(biases);

    if (ckpt.normalization) {
        j["normalization"] = norm_to_json(*ckpt.normalization);
    }
    j["membrane_classes"] = ckpt.membrane_classes;
    j["metadata"] = ckpt.metadata;

    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_checkpoint: cannot open " + path + " for writing");
    }
    out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_checkpoint: cannot open " + path);
    }
    json j;
    in >> j;

    if (j.at("format_version").get<int>() != kFormatVersion) {
        throw std::runtime_error("load_checkpoint: unsupported format version in " + path);
    }

    Checkpoint ckpt;
    ckpt.model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    ckpt.model.activation = activation_from_string(j.at("activation").get<std::string>());

    const auto& sizes = ckpt.model.layer_sizes;
    const auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
    const auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
    if (weights.size() + 1 != sizes.size() || biases.size() != weights.size()) {
        throw std::runtime_error("load_checkpoint: layer arity mismatch in " + path);
    }
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int rows = sizes[l + 1];
        const int cols = sizes[l];
        if (weights[l].size() != static_cast<std::size_t>(rows) * cols ||
            biases[l].size() != static_cast<std::size_t>(rows)) {
            throw std::runtime_error("load_checkpoint: parameter shape mismatch in " + path);
        }
        Matrix w(rows, cols);
        std::size_t k = 0;
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                w(r, c) = weights[l][k++];
            }
        }
        ckpt.model.weights.push_back(std::move(w));
        ckpt.model.biases.push_back(
            Eigen::Map<const Vector>(biases[l].data(), rows));
    }

    if (j.contains("normalization")) {
        ckpt.normalization = norm_from_json(j.at("normalization"));
    }
    if (j.contains("membrane_classes")) {
        ckpt.membrane_classes = j.at("membrane_classes").get<std::vector<std::string>>();
    }
    if (j.contains("metadata")) {
        ckpt.metadata = j.at("metadata").get<std::map<std::string, double>>();
    }
    return ckpt;
}

} // namespace h2x
