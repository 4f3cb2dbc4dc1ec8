#include "h2x/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace h2x {

void FusionConfig::validate() const {
    if (!(fusion_weight >= 0.0 && fusion_weight <= 1.0)) {
        throw std::domain_error("FusionConfig: fusion_weight outside [0, 1]");
    }
}

double fuse(double y_network, double y_physics, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::domain_error("fuse: alpha outside [0, 1]");
    }
    if (!std::isfinite(y_network) || !std::isfinite(y_physics)) {
        throw std::domain_error("fuse: non-finite inputs");
    }
    return alpha * y_network + (1.0 - alpha) * y_physics;
}

PhysicsParams calibrate_solubility(const PhysicsParams& base, const Dataset& train) {
    // X is linear in S_ca at fixed everything else, so the least-squares
    // scale is sum(y * x_ca) / sum(x_ca^2) with x_ca the cathode-only oracle
    // term. The anode term is held at its configured value.
    double num = 0.0;
    double den = 0.0;
    for (const auto& rec : train.records) {
        const auto& pt = rec.point;
        if (!pt.h2_concentration || pt.current_density <= 0.0) continue;
        const TransportState s = crossover_concentration(pt, base);
        const double x_cathode =
            s.d_eff * base.solubility_cathode * s.p_ca_eff / s.t_dif / s.m_o2 * 100.0;
        const double x_anode_part = x_cathode - s.x_h2_cathodic;  // anode contribution
        const double target = *pt.h2_concentration + x_anode_part;
        num += target * x_cathode;
        den += x_cathode * x_cathode;
    }
    if (!(den > 0.0)) {
        throw std::runtime_error("calibrate_solubility: no usable training records");
    }
    PhysicsParams out = base;
    out.solubility_cathode = base.solubility_cathode * (num / den);
    out.validate();
    return out;
}

Predictor load_predictor(const std::string& path) {
    Predictor p;
    if (std::filesystem::is_directory(path)) {
        p.ensemble = load_ensemble(path);
        p.normalization = p.ensemble->normalization;
        p.membrane_classes = p.ensemble->membrane_classes;
        return p;
    }
    Checkpoint ckpt = load_checkpoint(path);
    if (!ckpt.normalization) {
        throw std::runtime_error("load_predictor: checkpoint lacks normalization stats");
    }
    p.single = std::move(ckpt.model);
    p.normalization = *ckpt.normalization;
    p.membrane_classes = ckpt.membrane_classes;
    return p;
}

std::vector<PredictionRow> predict(const Predictor& model, const Dataset& points,
                                   const FusionConfig& fusion,
                                   const PhysicsParams& physics) {
    fusion.validate();
    const int classes = static_cast<int>(model.membrane_classes.size());
    if (!points.membrane_classes.empty() &&
        points.membrane_classes != model.membrane_classes) {
        throw std::runtime_error(
            "predict: membrane classes of the input do not match the checkpoint");
    }

    std::vector<PredictionRow> rows;
    rows.reserve(points.size());
    for (const auto& rec : points.records) {
        PredictionRow row;
        row.point = rec.point;
        const Vector8 x = normalize_features(encode_features(rec.point, classes),
                                             model.normalization);
        if (model.is_ensemble()) {
            row.uncertainty = predict_with_uncertainty(*model.ensemble, rec.point);
            row.y_network = row.uncertainty->mean;
        } else {
            row.y_network = forward<double>(*model.single, x);
        }

        row.y_final = row.y_network;
        if (fusion.enabled) {
            // crossover_concentration rejects i = 0; the error propagates.
            const double y_phys =
                crossover_concentration(rec.point, physics).x_h2_cathodic;
            row.y_physics = y_phys;
            row.y_fused = fuse(row.y_network, y_phys, fusion.fusion_weight);
            row.y_final = *row.y_fused;
        }
        if (fusion.clamp_output) {
            row.y_final = std::max(0.0, row.y_final);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace h2x
