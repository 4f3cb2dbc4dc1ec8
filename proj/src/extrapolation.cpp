#include "h2x/extrapolation.hpp"

#include "h2x/fusion.hpp"

#include <cmath>
#include <stdexcept>

namespace h2x {

ExtrapolationReport extrapolation_study(const Dataset& ds, double train_max_pressure,
                                        const std::vector<double>& test_pressures,
                                        const TrainConfig& cfg,
                                        const PhysicsParams& physics,
                                        double fusion_alpha) {
    if (test_pressures.empty()) {
        throw std::invalid_argument("extrapolation_study: no test pressures");
    }
    std::vector<std::size_t> train_idx;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        if (ds.records[r].point.pressure_cathode <= train_max_pressure) {
            train_idx.push_back(r);
        }
    }
    if (train_idx.empty()) {
        throw std::runtime_error("extrapolation_study: no records at or below " +
                                 std::to_string(train_max_pressure) + " bar");
    }
    Dataset train_pool = subset(ds, train_idx);

    SplitSpec inner;
    inner.train_frac = 0.875;
    inner.val_frac = 0.125;
    inner.test_frac = 0.0;
    inner.seed = cfg.base_seed;
    const SplitResult parts = stratified_split(train_pool, inner);
    const NormStats stats = compute_norm_stats(encode_dataset(parts.train));
    const SupervisedSet train_set = prepare_supervised(parts.train, stats, physics);
    const SupervisedSet val_set = prepare_supervised(parts.val, stats, physics);

    TrainConfig nn_cfg = cfg;
    nn_cfg.physics_weight = 0.0;
    Mlp nn = init_mlp(cfg.base_seed, {kFeatureCount, 128, 128, 1});
    const TrainReport nn_report = train(nn, train_set, val_set, nn_cfg);

    TrainConfig pinn_cfg = cfg;
    Mlp pinn = init_mlp(cfg.base_seed, {kFeatureCount, 128, 128, 1});
    const TrainReport pinn_report = train(pinn, train_set, val_set, pinn_cfg);

    ExtrapolationReport report;
    report.train_max_pressure = train_max_pressure;
    report.nn_stop_epoch = nn_report.stop_epoch;
    report.pinn_stop_epoch = pinn_report.stop_epoch;

    for (double pressure : test_pressures) {
        std::vector<std::size_t> slice;
        for (std::size_t r = 0; r < ds.size(); ++r) {
            const double p = ds.records[r].point.pressure_cathode;
            if (std::abs(p - pressure) <= 1e-9 * std::max(1.0, pressure)) {
                slice.push_back(r);
            }
        }
        if (slice.empty()) {
            throw std::runtime_error("extrapolation_study: empty test slice at " +
                                     std::to_string(pressure) + " bar");
        }
        const Dataset test = subset(ds, slice);
        const Matrix features = normalize_features(encode_dataset(test), stats);
        const Vector y = labels(test);

        const Vector nn_pred = batch_forward(nn, features);
        const Vector pinn_pred = batch_forward(pinn, features);
        Vector physics_pred(y.size());
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            physics_pred(k) =
                crossover_concentration(test.records[static_cast<std::size_t>(k)].point,
                                        physics)
                    .x_h2_cathodic;
        }
        const Vector fused =
            fusion_alpha * pinn_pred + (1.0 - fusion_alpha) * physics_pred;

        report.rows.push_back(
            {pressure, "nn", compute_metrics(nn_pred, y), slice.size()});
        report.rows.push_back(
            {pressure, "pinn", compute_metrics(pinn_pred, y), slice.size()});
        report.rows.push_back(
            {pressure, "fusion", compute_metrics(fused, y), slice.size()});
    }
    return report;
}

} // namespace h2x
