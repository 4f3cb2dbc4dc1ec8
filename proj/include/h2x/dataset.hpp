#pragma once

#include "h2x/physics.hpp"
#include "h2x/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace h2x {

enum class Provenance { Experimental, Augmented };

std::string to_string(Provenance p);

/// One dataset row: the physical point plus its source bookkeeping.
struct DataRecord {
    std::string study;
    OperatingPoint point;
    Provenance provenance = Provenance::Experimental;
};

/// Per-feature min-max statistics fitted on a training partition.
struct NormStats {
    Vector8 feature_min = Vector8::Zero();
    Vector8 feature_max = Vector8::Ones();
    std::array<bool, kFeatureCount> degenerate{};  // max == min
};

/// Ordered collection of operating records plus the categorical registry
/// and (once fitted) normalization statistics. Immutable in practice:
/// pipeline steps return new datasets.
struct Dataset {
    std::vector<DataRecord> records;
    std::vector<std::string> membrane_classes;  ///< index == OperatingPoint::membrane_id
    std::optional<NormStats> normalization_stats;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    /// Class index for a membrane name; -1 when unknown.
    int class_index(const std::string& membrane) const;
};

/// Exact CSV header required by load_csv/save_csv.
extern const char* const kCsvHeader;

/// Parses the declared CSV schema. Rows violating the OperatingPoint
/// invariants (or the schema) are collected and reported together in a
/// std::runtime_error listing offending line numbers. Labels may be empty
/// only when require_labels is false (prediction inputs).
Dataset load_csv(const std::string& path, bool require_labels = true);

/// Writes a dataset back in the same schema (shortest round-trip numerals).
void save_csv(const Dataset& ds, const std::string& path);

/// 8-feature encoding (T, P_ca, P_an, thickness, i, membrane_code,
/// compression, pt_interlayer); membrane_code = id / (class_count - 1).
/// Throws std::runtime_error for an out-of-range membrane id.
Vector8 encode_features(const OperatingPoint& pt, int class_count);

/// Row-wise encoding of every record.
Matrix encode_dataset(const Dataset& ds);

/// Labels as a vector; throws if any record lacks one.
Vector labels(const Dataset& ds);

/// Fits min-max statistics on the given (training) feature matrix.
NormStats compute_norm_stats(const Matrix& features);

/// Maps features into [0,1] per fitted stats; degenerate features map to 0.
Matrix normalize_features(const Matrix& features, const NormStats& stats);
Vector8 normalize_features(const Vector8& features, const NormStats& stats);

/// Inverse of normalize_features for non-degenerate features.
Matrix denormalize_features(const Matrix& scaled, const NormStats& stats);

/// 70/10/20 stratified split specification.
struct SplitSpec {
    double train_frac = 0.70;
    double val_frac = 0.10;
    double test_frac = 0.20;
    std::string stratify_key = "membrane_id";
    std::uint64_t seed = 42;

    void validate() const;  // fractions positive, sum to 1
};

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
    std::vector<std::string> warnings;
};

/// Deterministic stratified split: per-class allocations stay within one
/// record of the exact fractions and the global partition sizes are exact.
/// Classes with fewer than 3 records go entirely to train (with a warning).
SplitResult stratified_split(const Dataset& ds, const SplitSpec& spec);

/// Deterministic stratified k-fold assignment; returns record indices per fold.
std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& ds, int folds,
                                                       std::uint64_t seed);

/// Subset by record indices (shares the class registry and stats).
Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices);

} // namespace h2x
