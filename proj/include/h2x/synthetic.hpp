#pragma once

#include "h2x/dataset.hpp"
#include "h2x/physics.hpp"

#include <cstdint>
#include <vector>

namespace h2x {

/// Random-sample synthetic dataset: labels come from the mechanistic chain,
/// optionally with additive Gaussian noise (clamped to the [0,20] label
/// bounds). Thickness classes double as membrane classes.
struct SyntheticSpec {
    int n_points = 200;
    double temperature_min = 25.0;
    double temperature_max = 85.0;
    double pressure_min = 1.0;
    double pressure_max = 80.0;
    double current_min = 0.1;
    double current_max = 2.0;
    std::vector<double> thickness_classes_um = {100.0, 150.0, 200.0};
    double pressure_anode = 1.0;
    double noise_std = 0.0;  ///< absolute %, 0 = noiseless
    std::uint64_t seed = 7;
};

Dataset make_synthetic_dataset(const SyntheticSpec& spec, const PhysicsParams& physics);

/// Sweep-structured variant mirroring how crossover data is actually
/// measured: one current-density series per (thickness, temperature,
/// pressure) condition. n_points is distributed across the series.
struct SweepSpec {
    int n_points = 200;
    std::vector<double> temperatures = {25.0, 85.0};
    std::vector<double> pressures = {1.0, 40.0, 80.0};
    std::vector<double> thickness_classes_um = {100.0, 150.0, 200.0};
    double current_min = 0.1;
    double current_max = 2.0;
    double pressure_anode = 1.0;
    double noise_std = 0.0;
    std::uint64_t seed = 13;
};

Dataset make_synthetic_sweep_dataset(const SweepSpec& spec, const PhysicsParams& physics);

/// Grid variant for pressure-extrapolation studies: a sweep of current
/// densities at each listed cathode pressure, fixed temperature class mix.
struct PressureGridSpec {
    std::vector<double> pressures = {1.0, 6.0, 20.0, 40.0, 80.0};
    int currents_per_pressure = 12;
    double current_min = 0.2;
    double current_max = 2.0;
    double temperature = 25.0;
    double thickness_um = 200.0;
    double pressure_anode = 1.0;
    double noise_std = 0.0;
    std::uint64_t seed = 11;
};

Dataset make_pressure_grid_dataset(const PressureGridSpec& spec,
                                   const PhysicsParams& physics);

} // namespace h2x
