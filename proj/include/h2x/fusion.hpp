#pragma once

#include "h2x/dataset.hpp"
#include "h2x/ensemble.hpp"
#include "h2x/physics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace h2x {

/// Inference-time blend of network and physics-model predictions.
struct FusionConfig {
    double fusion_weight = 0.5;  ///< alpha in [0,1]; 1 = pure network
    bool enabled = true;
    bool clamp_output = true;    ///< floor predictions at 0 % for presentation

    void validate() const;
};

/// alpha * y_network + (1 - alpha) * y_physics.
double fuse(double y_network, double y_physics, double alpha);

/// Least-squares calibration of the cathode Henry solubility on training
/// labels: scales S_H2^ca so the oracle best matches the measured
/// concentrations. Returns the calibrated parameter set.
PhysicsParams calibrate_solubility(const PhysicsParams& base, const Dataset& train);

/// Loaded predictor: either a single checkpoint or an ensemble directory.
struct Predictor {
    std::optional<Mlp> single;
    std::optional<EnsembleModel> ensemble;
    NormStats normalization;
    std::vector<std::string> membrane_classes;

    bool is_ensemble() const { return ensemble.has_value(); }
};

/// Dispatches on path type: manifest directory -> ensemble, file -> single.
Predictor load_predictor(const std::string& path);

struct PredictionRow {
    OperatingPoint point;
    double y_network = 0.0;                    ///< raw (unclamped) network output
    std::optional<double> y_physics;
    std::optional<double> y_fused;
    double y_final = 0.0;                      ///< after optional fusion and clamp
    std::optional<PredictionWithUncertainty> uncertainty;
};

/// Full inference pipeline: encode -> normalize -> forward (ensemble mean
/// when applicable) -> optional physics fusion -> optional clamp. Fusion
/// propagates the oracle's preconditions: a zero-current point is an error
/// when fusion is enabled.
std::vector<PredictionRow> predict(const Predictor& model, const Dataset& points,
                                   const FusionConfig& fusion,
                                   const PhysicsParams& physics);

} // namespace h2x
