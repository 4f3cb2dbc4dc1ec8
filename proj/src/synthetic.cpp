#include "h2x/synthetic.hpp"

#include "h2x/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace h2x {

namespace {

std::string thickness_class_name(double um) {
    return "synthetic-" + std::to_string(static_cast<int>(um)) + "um";
}

double noisy_label(double clean, double noise_std, Rng& rng) {
    double y = clean;
    if (noise_std > 0.0) {
        y += noise_std * rng.gaussian();
    }
    return std::clamp(y, 0.0, 20.0);
}

} // namespace

Dataset make_synthetic_dataset(const SyntheticSpec& spec, const PhysicsParams& physics) {
    if (spec.n_points < 1 || spec.thickness_classes_um.empty()) {
        throw std::invalid_argument("make_synthetic_dataset: empty spec");
    }
    Dataset ds;
    for (double th : spec.thickness_classes_um) {
        ds.membrane_classes.push_back(thickness_class_name(th));
    }
    std::sort(ds.membrane_classes.begin(), ds.membrane_classes.end());

    Rng rng(spec.seed);
    for (int k = 0; k < spec.n_points; ++k) {
        OperatingPoint pt;
        pt.temperature_stack = rng.uniform(spec.temperature_min, spec.temperature_max);
        pt.pressure_cathode = rng.uniform(spec.pressure_min, spec.pressure_max);
        pt.pressure_anode = spec.pressure_anode;
        const double th =
            spec.thickness_classes_um[rng.index(spec.thickness_classes_um.size())];
        pt.thickness = th;
        pt.current_density = rng.uniform(spec.current_min, spec.current_max);
        pt.compression = 0.0;
        pt.pt_interlayer = static_cast<int>(rng.index(2));
        pt.membrane_id = ds.class_index(thickness_class_name(th));

        const double clean = crossover_concentration(pt, physics).x_h2_cathodic;
        pt.h2_concentration = noisy_label(clean, spec.noise_std, rng);
        ds.records.push_back({"synthetic", pt, Provenance::Experimental});
    }
    return ds;
}

Dataset make_synthetic_sweep_dataset(const SweepSpec& spec, const PhysicsParams& physics) {
    if (spec.n_points < 1 || spec.temperatures.empty() || spec.pressures.empty() ||
        spec.thickness_classes_um.empty()) {
        throw std::invalid_argument("make_synthetic_sweep_dataset: empty spec");
    }
    Dataset ds;
    for (double th : spec.thickness_classes_um) {
        ds.membrane_classes.push_back(thickness_class_name(th));
    }
    std::sort(ds.membrane_classes.begin(), ds.membrane_classes.end());

    const std::size_t series_count = spec.thickness_classes_um.size() *
                                     spec.temperatures.size() * spec.pressures.size();
    const int base = spec.n_points / static_cast<int>(series_count);
    int remainder = spec.n_points % static_cast<int>(series_count);
    if (base < 2) {
        throw std::invalid_argument(
            "make_synthetic_sweep_dataset: too few points per series");
    }

    Rng rng(spec.seed);
    for (double th : spec.thickness_classes_um) {
        for (double t : spec.temperatures) {
            for (double p : spec.pressures) {
                int n_i = base;
                if (remainder > 0) {
                    ++n_i;
                    --remainder;
                }
                const double log_lo = std::log(spec.current_min);
                const double log_hi = std::log(spec.current_max);
                for (int k = 0; k < n_i; ++k) {
                    OperatingPoint pt;
                    pt.temperature_stack = t;
                    pt.pressure_cathode = p;
                    pt.pressure_anode = spec.pressure_anode;
                    pt.thickness = th;
                    // Geometric spacing tracks the hyperbolic decay of X(i).
                    pt.current_density =
                        std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(k) /
                                              static_cast<double>(n_i - 1));
                    pt.compression = 0.0;
                    pt.pt_interlayer = 0;
                    pt.membrane_id = ds.class_index(thickness_class_name(th));

                    const double clean =
                        crossover_concentration(pt, physics).x_h2_cathodic;
                    pt.h2_concentration = noisy_label(clean, spec.noise_std, rng);
                    ds.records.push_back({"synthetic-sweep", pt, Provenance::Experimental});
                }
            }
        }
    }
    return ds;
}

Dataset make_pressure_grid_dataset(const PressureGridSpec& spec,
                                   const PhysicsParams& physics) {
    if (spec.pressures.empty() || spec.currents_per_pressure < 2) {
        throw std::invalid_argument("make_pressure_grid_dataset: empty spec");
    }
    Dataset ds;
    ds.membrane_classes.push_back(thickness_class_name(spec.thickness_um));

    Rng rng(spec.seed);
    for (double p : spec.pressures) {
        for (int k = 0; k < spec.currents_per_pressure; ++k) {
            OperatingPoint pt;
            pt.temperature_stack = spec.temperature;
            pt.pressure_cathode = p;
            pt.pressure_anode = spec.pressure_anode;
            pt.thickness = spec.thickness_um;
            pt.current_density =
                spec.current_min + (spec.current_max - spec.current_min) *
                                       static_cast<double>(k) /
                                       static_cast<double>(spec.currents_per_pressure - 1);
            pt.compression = 0.0;
            pt.pt_interlayer = 0;
            pt.membrane_id = 0;

            const double clean = crossover_concentration(pt, physics).x_h2_cathodic;
            pt.h2_concentration = noisy_label(clean, spec.noise_std, rng);
            ds.records.push_back({"synthetic-grid", pt, Provenance::Experimental});
        }
    }
    return ds;
}

} // namespace h2x
