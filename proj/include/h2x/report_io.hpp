#pragma once

#include "h2x/bench.hpp"
#include "h2x/ensemble.hpp"
#include "h2x/extrapolation.hpp"
#include "h2x/fusion.hpp"
#include "h2x/train.hpp"

#include <string>
#include <vector>

namespace h2x {

/// TrainReport as JSON (config echo, traces, final metrics).
void write_train_report(const TrainReport& report, const std::string& path);

/// One CSV row per cross-validation run:
/// rep,fold,seed,beta,r2,rmse,mae,mape,stop_epoch.
void write_cv_csv(const CvReport& report, const std::string& path);

/// Prediction rows with echoed physical inputs; uncertainty columns appear
/// when the predictor is an ensemble, physics/fusion columns when enabled.
void write_predictions_csv(const std::vector<PredictionRow>& rows,
                           const std::vector<std::string>& membrane_classes,
                           const std::string& path);

/// Per-pressure per-method metric table.
void write_extrapolation_csv(const ExtrapolationReport& report, const std::string& path);

void write_bench_json(const BenchReport& report, const std::string& path);

void write_calibration_json(const CalibrationReport& report, const std::string& path);

void write_sensitivity_csv(const std::vector<SensitivityResult>& results,
                           const std::string& path);

/// Deterministic plain-text digest of every known result file in a run
/// directory; byte-identical across invocations on the same directory.
std::string render_run_report(const std::string& run_dir);

} // namespace h2x
