#pragma once

#include "h2x/dataset.hpp"
#include "h2x/physics.hpp"

namespace h2x {

/// Knobs of the physics-constrained spline augmentation.
struct AugmentConfig {
    int max_points_per_gap = 10;
    double physics_tolerance = 0.05;  ///< relative deviation allowed vs oracle
    double bounds_lo = 0.0;           ///< % label bounds
    double bounds_hi = 20.0;
    bool enforce_monotone = true;

    void validate() const;
};

struct AugmentStats {
    std::size_t series = 0;
    std::size_t candidates = 0;
    std::size_t rejected_bounds = 0;
    std::size_t rejected_monotone = 0;
    std::size_t rejected_physics = 0;
    std::size_t emitted = 0;
};

/// Interpolates each concentration-current series (all features except
/// current density fixed) with a spline and inserts up to
/// max_points_per_gap equally spaced points per gap, discarding candidates
/// that leave the label bounds, break endpoint monotonicity, or deviate
/// from the physics oracle by more than the tolerance. Returns the input
/// records plus the accepted interpolants, tagged augmented.
Dataset augment(const Dataset& ds, const AugmentConfig& cfg, const PhysicsParams& physics,
                AugmentStats* stats = nullptr);

} // namespace h2x
