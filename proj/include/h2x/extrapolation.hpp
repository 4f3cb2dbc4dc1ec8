#pragma once

#include "h2x/dataset.hpp"
#include "h2x/physics.hpp"
#include "h2x/train.hpp"

#include <string>
#include <vector>

namespace h2x {

/// One (pressure, method) cell of the extrapolation comparison.
struct ExtrapolationRow {
    double pressure;
    std::string method;  ///< "nn", "pinn", or "fusion"
    Metrics metrics;
    std::size_t n_points;
};

struct ExtrapolationReport {
    double train_max_pressure;
    std::vector<ExtrapolationRow> rows;
    int nn_stop_epoch = 0;
    int pinn_stop_epoch = 0;
};

/// Trains a pure network (beta = 0) and a physics-informed network
/// (cfg.physics_weight) on the records at or below train_max_pressure, then
/// scores both plus the physics fusion at every requested test pressure.
/// Throws if a requested pressure matches no records.
ExtrapolationReport extrapolation_study(const Dataset& ds, double train_max_pressure,
                                        const std::vector<double>& test_pressures,
                                        const TrainConfig& cfg,
                                        const PhysicsParams& physics,
                                        double fusion_alpha = 0.5);

} // namespace h2x
