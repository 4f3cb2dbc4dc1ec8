#pragma once

#include "h2x/checkpoint.hpp"
#include "h2x/dataset.hpp"
#include "h2x/mlp.hpp"
#include "h2x/train.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace h2x {

/// Ordered collection of identically configured, differently seeded models
/// plus the shared normalization needed for inference.
struct EnsembleModel {
    std::vector<Mlp> members;              ///< seed order
    std::vector<std::uint64_t> member_seeds;
    std::vector<std::uint64_t> excluded_seeds;  ///< diverged during training
    NormStats normalization;
    std::vector<std::string> membrane_classes;
    double physics_weight = 0.3;

    std::size_t size() const { return members.size(); }
};

struct PredictionWithUncertainty {
    double mean = 0.0;
    double stddev = 0.0;  ///< population (1/N) spread
    std::pair<double, double> ci95{0.0, 0.0};
    Vector member_values;
};

struct EnsembleTrainResult {
    EnsembleModel model;
    Dataset train;
    Dataset val;
    Dataset test;
    std::vector<std::string> warnings;
};

/// Trains n_members independent runs with seeds cfg.base_seed + index on a
/// shared stratified 70/10/20 split. Diverged members are excluded with a
/// warning; the rest keep seed order. Members may train on parallel workers.
EnsembleTrainResult train_ensemble(const Dataset& ds, const TrainConfig& cfg,
                                   int n_members, const PhysicsParams& physics,
                                   const SplitSpec& split = {}, int jobs = 1);

/// Ensemble mean of the member outputs for one already-normalized input row.
double ensemble_mean(const EnsembleModel& e, const Vector& normalized_features);

/// Population statistics over member predictions: mu, sigma = sqrt(1/N sum
/// (y_i - mu)^2), ci95 = mu +- 1.96 sigma.
PredictionWithUncertainty predict_with_uncertainty(const EnsembleModel& e,
                                                   const OperatingPoint& pt);

/// Batched member predictions: one column per member.
Matrix ensemble_member_predictions(const EnsembleModel& e, const Matrix& normalized);

struct CoverageLevel {
    double nominal;   ///< e.g. 0.95
    double z;         ///< normal quantile used for the interval
    double coverage;  ///< empirical fraction inside
};

struct CalibrationReport {
    std::vector<CoverageLevel> levels;  ///< 50/80/90/95 %
    std::size_t n = 0;
};

/// Fraction of labels inside each nominal interval mu +- z sigma.
CalibrationReport calibration(const EnsembleModel& e, const Dataset& test);

struct FeaturePerturbation {
    Feature feature;
    double delta;  ///< physical units
};

/// The paper-default probe set: +-1 degC, +-1 bar, +-0.1 A/cm^2, +-1 um.
std::vector<FeaturePerturbation> default_perturbations();

struct SensitivityResult {
    Feature feature;
    double delta;
    double mean;    ///< mean |dy/df| in % per unit
    double stddev;
    std::size_t n_used = 0;
    std::size_t n_skipped = 0;  ///< perturbation left the valid domain
};

/// Central-difference sensitivity of the ensemble mean at each base point:
/// |y(p + d) - y(p - d)| / (2 d), aggregated as mean +- std.
std::vector<SensitivityResult> sensitivity(const EnsembleModel& e,
                                           const std::vector<OperatingPoint>& base_points,
                                           const std::vector<FeaturePerturbation>& probes);

/// One checkpoint file per member plus a manifest with seeds and shared stats.
void save_ensemble(const EnsembleModel& e, const std::string& directory);
EnsembleModel load_ensemble(const std::string& directory);

} // namespace h2x
