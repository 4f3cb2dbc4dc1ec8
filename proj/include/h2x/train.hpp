#pragma once

#include "h2x/dataset.hpp"
#include "h2x/mlp.hpp"
#include "h2x/physics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace h2x {

struct AdamMoments {
    double gamma1 = 0.9;
    double gamma2 = 0.999;
    double epsilon = 1e-8;
};

struct PlateauSpec {
    double factor = 0.5;
    int patience = 50;
    double lr_min = 1e-6;
};

struct EarlyStopSpec {
    int patience = 150;
    double min_delta = 1e-6;
};

struct TrainConfig {
    double physics_weight = 0.3;  ///< beta in [0,1]
    double lr = 5.5e-3;
    AdamMoments adam_moments;
    int batch_size = 32;
    int max_epochs = 2000;
    PlateauSpec plateau;
    EarlyStopSpec early_stop;
    std::uint64_t base_seed = 42;

    void validate() const;
};

/// Training-ready arrays derived from a Dataset: normalized features,
/// physical labels, and the precomputed physics-oracle targets feeding the
/// crossover constraint. Records at zero current density carry no oracle
/// target and are excluded from the physics term (counted in
/// oracle_excluded).
struct SupervisedSet {
    Matrix features;            ///< n x 8, min-max normalized
    Vector labels;              ///< physical %
    Vector oracle_x;            ///< oracle crossover %, 0 where invalid
    Vector residual_static;     ///< sum of the 10 state residuals per record
    std::vector<std::uint8_t> oracle_valid;
    std::size_t oracle_excluded = 0;

    Eigen::Index n() const { return features.rows(); }
};

/// Encodes, normalizes, and evaluates the oracle once per record.
SupervisedSet prepare_supervised(const Dataset& ds, const NormStats& stats,
                                 const PhysicsParams& physics);

/// Mean squared error in label units (%^2).
double data_loss(const Vector& pred, const Vector& label);

/// Mean over records of the mean of the 11 physics residuals, with the
/// crossover constraint evaluated against the network prediction. The ten
/// state constraints are satisfied identically by the analytic chain, so the
/// term reduces to (1/11)(y_hat - X_oracle)^2 per record.
double physics_loss(const SupervisedSet& batch, const Vector& pred);

/// The 11-term residual vector for one record and prediction, for term-by-term
/// diagnostics.
Residuals11 pinn_residuals(const OperatingPoint& pt, double y_hat,
                           const PhysicsParams& physics);

/// (1 - beta) * data + beta * physics.
double total_loss(double data, double physics, double beta);

/// First-order/second-order moment buffers for Adam.
struct AdamState {
    Gradients m;
    Gradients v;
    long step = 0;
};

AdamState make_adam_state(const Mlp& model);

/// Standard bias-corrected Adam update, in place.
void adam_step(Mlp& params, const Gradients& grads, AdamState& state, double lr,
               const AdamMoments& moments);

/// Halves the learning rate after `patience` epochs without any validation
/// improvement, never dropping below lr_min.
class PlateauScheduler {
public:
    PlateauScheduler(double initial_lr, const PlateauSpec& spec);

    /// Feeds one epoch's validation loss; returns the (possibly reduced) lr.
    double observe(double val_loss);
    double lr() const { return lr_; }

private:
    double lr_;
    PlateauSpec spec_;
    double best_;
    int stall_ = 0;
};

/// Stops after `patience` epochs without improvement greater than min_delta.
class EarlyStopper {
public:
    explicit EarlyStopper(const EarlyStopSpec& spec);

    /// Feeds one epoch's validation loss; returns true when training should stop.
    bool observe(double val_loss);
    int stall() const { return stall_; }

private:
    EarlyStopSpec spec_;
    double best_;
    int stall_ = 0;
    bool primed_ = false;
};

struct EpochTrace {
    double train_loss;
    double val_loss;  ///< data loss only, so beta does not distort stopping
    double lr;
};

struct Metrics {
    std::optional<double> r2;  ///< empty when the labels have zero variance
    double rmse;
    double mae;
    double mape;               ///< %, zero labels skipped
    int mape_skipped = 0;
};

/// Standard regression metrics; requires n >= 2. R^2 is undefined (empty)
/// for zero-variance labels; accessing it then raises the error.
Metrics compute_metrics(const Vector& pred, const Vector& label);

struct TrainReport {
    std::vector<EpochTrace> epochs;
    int stop_epoch = 0;
    int best_epoch = 0;
    double best_val_loss = 0.0;
    std::optional<Metrics> test_metrics;
    TrainConfig config;
};

/// Raised when a training run produces a non-finite loss.
struct TrainingDiverged : std::runtime_error {
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

/// Mini-batch Adam training with plateau scheduling and early stopping;
/// restores the best-validation parameters before returning. Fully
/// deterministic given (data, cfg): every random draw comes from
/// cfg.base_seed.
TrainReport train(Mlp& model, const SupervisedSet& train_set, const SupervisedSet& val_set,
                  const TrainConfig& cfg);

struct CvPlan {
    int folds = 5;
    int repetitions = 20;

    std::uint64_t seed(std::uint64_t base, int rep, int fold) const {
        return base + static_cast<std::uint64_t>(rep) * folds + fold;
    }
};

struct CvRow {
    int rep;
    int fold;
    std::uint64_t seed;
    double beta;
    Metrics metrics;
    int stop_epoch;
};

struct CvSummary {
    double r2_mean, r2_std;
    double rmse_mean, rmse_std;
    double mae_mean, mae_std;
    double mape_mean, mape_std;
};

struct CvReport {
    std::vector<CvRow> rows;  ///< one per run, rep-major then fold
    CvSummary summary;
};

/// folds x repetitions training runs with the seed formula base + rep*folds
/// + fold; each run holds out one stratified fold for testing and carves a
/// validation share from the remainder. Runs execute on `jobs` workers
/// (results are ordered deterministically regardless of jobs).
CvReport cross_validate(const Dataset& ds, const TrainConfig& cfg, const CvPlan& plan,
                        const PhysicsParams& physics, int jobs = 1,
                        const std::function<void(const CvRow&)>& on_row = {});

} // namespace h2x
