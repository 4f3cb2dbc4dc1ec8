#pragma once

#include "h2x/dataset.hpp"
#include "h2x/mlp.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace h2x {

/// Everything needed to reproduce predictions: topology, parameters,
/// normalization statistics, and the training provenance of the model.
struct Checkpoint {
    Mlp model;
    std::optional<NormStats> normalization;
    std::vector<std::string> membrane_classes;
    std::map<std::string, double> metadata;  ///< seed, physics_weight, stop_epoch, ...
};

/// Writes a versioned JSON checkpoint. Numerals use shortest round-trip
/// formatting, so load(save(m)) reproduces parameters bit-exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

} // namespace h2x
