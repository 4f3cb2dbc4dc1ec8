#pragma once

#include "h2x/augment.hpp"
#include "h2x/dataset.hpp"
#include "h2x/fusion.hpp"
#include "h2x/physics.hpp"
#include "h2x/train.hpp"

#include <string>

namespace h2x {

/// All tool configuration in one JSON file; every section and key is
/// optional and falls back to the built-in defaults.
struct AppConfig {
    PhysicsParams physics;
    TrainConfig train;
    AugmentConfig augment;
    FusionConfig fusion;
    SplitSpec split;
};

/// Parses a config file. Keys mirror the struct field names, e.g.
///   {"physics": {"darcy_coeff": 1e-5}, "train": {"lr": 5.5e-3}}.
AppConfig load_config(const std::string& path);

/// Writes the resolved configuration (defaults filled in).
void save_config(const AppConfig& cfg, const std::string& path);

} // namespace h2x
