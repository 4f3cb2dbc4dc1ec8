// h2x: train, validate, and serve the hydrogen-crossover predictor.
//
// Subcommands: augment, train, crossval, ensemble, predict, extrapolate,
// bench, report. Every subcommand reads an optional JSON config (--config or
// the H2X_CONFIG environment variable) and applies flag overrides on top.
// Errors leave a machine-readable JSON object on stderr and a nonzero exit.

#include <CLI11.hpp>
#include <json.hpp>

#include "h2x/augment.hpp"
#include "h2x/bench.hpp"
#include "h2x/checkpoint.hpp"
#include "h2x/config_io.hpp"
#include "h2x/ensemble.hpp"
#include "h2x/extrapolation.hpp"
#include "h2x/fusion.hpp"
#include "h2x/report_io.hpp"
#include "h2x/synthetic.hpp"
#include "h2x/train.hpp"
#include "h2x/util.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<double> beta;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string output_dir = ".";
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool training) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    if (training) {
        cmd->add_option("--beta", flags.beta, "physics weight in [0,1]");
        cmd->add_option("--seed", flags.seed, "base random seed");
        cmd->add_option("--jobs", flags.jobs, "parallel workers")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--output-dir", flags.output_dir, "directory for results");
    }
}

h2x::AppConfig resolve_config(const CommonFlags& flags) {
    std::string path = flags.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("H2X_CONFIG")) path = env;
    }
    h2x::AppConfig cfg;
    if (!path.empty()) cfg = h2x::load_config(path);
    if (flags.beta) cfg.train.physics_weight = *flags.beta;
    if (flags.seed) {
        cfg.train.base_seed = *flags.seed;
        cfg.split.seed = *flags.seed;
    }
    cfg.train.validate();
    return cfg;
}

fs::path ensure_output_dir(const CommonFlags& flags) {
    fs::path dir(flags.output_dir);
    fs::create_directories(dir);
    return dir;
}

int run_augment(const CommonFlags& flags, const std::string& input,
                const std::string& output) {
    const h2x::AppConfig cfg = resolve_config(flags);
    const h2x::Dataset ds = h2x::load_csv(input);
    h2x::AugmentStats stats;
    const h2x::Dataset out = h2x::augment(ds, cfg.augment, cfg.physics, &stats);
    h2x::save_csv(out, output);
    std::cout << "augment: " << ds.size() << " -> " << out.size() << " records ("
              << stats.emitted << " added, " << stats.rejected_bounds << " bounds / "
              << stats.rejected_monotone << " monotone / " << stats.rejected_physics
              << " physics rejections)\n";
    return 0;
}

int run_train(const CommonFlags& flags, const std::string& input) {
    const h2x::AppConfig cfg = resolve_config(flags);
    const fs::path dir = ensure_output_dir(flags);

    const h2x::Dataset ds = h2x::load_csv(input);
    const h2x::SplitResult parts = h2x::stratified_split(ds, cfg.split);
    for (const auto& w : parts.warnings) std::cerr << "warning: " << w << "\n";

    const h2x::NormStats stats = h2x::compute_norm_stats(h2x::encode_dataset(parts.train));
    const h2x::SupervisedSet train_set =
        h2x::prepare_supervised(parts.train, stats, cfg.physics);
    const h2x::SupervisedSet val_set =
        h2x::prepare_supervised(parts.val, stats, cfg.physics);
    const h2x::SupervisedSet test_set =
        h2x::prepare_supervised(parts.test, stats, cfg.physics);
    if (train_set.oracle_excluded > 0) {
        std::cerr << "warning: " << train_set.oracle_excluded
                  << " zero-current record(s) excluded from the physics term\n";
    }

    h2x::Mlp model = h2x::init_mlp(cfg.train.base_seed, {h2x::kFeatureCount, 128, 128, 1});
    h2x::TrainReport report = h2x::train(model, train_set, val_set, cfg.train);
    const h2x::Vector pred = h2x::batch_forward(model, test_set.features);
    report.test_metrics = h2x::compute_metrics(pred, test_set.labels);

    h2x::Checkpoint ckpt;
    ckpt.model = std::move(model);
    ckpt.normalization = stats;
    ckpt.membrane_classes = ds.membrane_classes;
    ckpt.metadata["seed"] = static_cast<double>(cfg.train.base_seed);
    ckpt.metadata["physics_weight"] = cfg.train.physics_weight;
    ckpt.metadata["stop_epoch"] = report.stop_epoch;
    ckpt.metadata["best_val_loss"] = report.best_val_loss;
    h2x::save_checkpoint(ckpt, (dir / "checkpoint.json").string());
    h2x::write_train_report(report, (dir / "train_report.json").string());

    std::cout << "train: stop_epoch=" << report.stop_epoch
              << " best_val_loss=" << report.best_val_loss
              << " test_r2=" << report.test_metrics->r2.value_or(0.0)
              << " test_rmse=" << report.test_metrics->rmse << "\n";
    return 0;
}

int run_crossval(const CommonFlags& flags, const std::string& input, int folds,
                 int reps) {
    const h2x::AppConfig cfg = resolve_config(flags);
    const fs::path dir = ensure_output_dir(flags);

    const h2x::Dataset ds = h2x::load_csv(input);
    h2x::CvPlan plan;
    plan.folds = folds;
    plan.repetitions = reps;
    const h2x::CvReport report =
        h2x::cross_validate(ds, cfg.train, plan, cfg.physics, flags.jobs,
                            [](const h2x::CvRow& row) {
                                std::cerr << "run rep=" << row.rep
                                          << " fold=" << row.fold
                                          << " seed=" << row.seed
                                          << " r2=" << row.metrics.r2.value_or(0.0)
                                          << "\n";
                            });
    h2x::write_cv_csv(report, (dir / "cv_results.csv").string());
    std::cout << "crossval: " << report.rows.size() << " runs, r2 "
              << report.summary.r2_mean << " +- " << report.summary.r2_std << ", rmse "
              << report.summary.rmse_mean << " +- " << report.summary.rmse_std << "\n";
    return 0;
}

int run_ensemble(const CommonFlags& flags, const std::string& input, int members) {
    const h2x::AppConfig cfg = resolve_config(flags);
    const fs::path dir = ensure_output_dir(flags);

    const h2x::Dataset ds = h2x::load_csv(input);
    const h2x::EnsembleTrainResult result =
        h2x::train_ensemble(ds, cfg.train, members, cfg.physics, cfg.split, flags.jobs);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    const fs::path ens_dir = dir / "ensemble";
    h2x::save_ensemble(result.model, ens_dir.string());

    const h2x::CalibrationReport cal = h2x::calibration(result.model, result.test);
    h2x::write_calibration_json(cal, (dir / "calibration.json").string());

    std::vector<h2x::OperatingPoint> bases;
    for (const auto& rec : result.test.records) bases.push_back(rec.point);
    const auto sens =
        h2x::sensitivity(result.model, bases, h2x::default_perturbations());
    h2x::write_sensitivity_csv(sens, (dir / "sensitivity.csv").string());

    std::cout << "ensemble: " << result.model.size() << " member(s), "
              << result.model.excluded_seeds.size() << " excluded; 95% coverage "
              << cal.levels.back().coverage << "\n";
    return 0;
}

int run_predict(const CommonFlags& flags, const std::string& checkpoint,
                const std::string& input, const std::string& output,
                std::optional<double> fusion_alpha, bool no_fusion, bool no_clamp,
                const std::string& calibrate_csv) {
    h2x::AppConfig cfg = resolve_config(flags);
    if (fusion_alpha) cfg.fusion.fusion_weight = *fusion_alpha;
    if (no_fusion) cfg.fusion.enabled = false;
    if (no_clamp) cfg.fusion.clamp_output = false;

    h2x::PhysicsParams physics = cfg.physics;
    if (!calibrate_csv.empty()) {
        physics = h2x::calibrate_solubility(physics, h2x::load_csv(calibrate_csv));
        std::cerr << "calibrated solubility_cathode = " << physics.solubility_cathode
                  << "\n";
    }

    const h2x::Predictor model = h2x::load_predictor(checkpoint);
    const h2x::Dataset points = h2x::load_csv(input, /*require_labels=*/false);
    const auto rows = h2x::predict(model, points, cfg.fusion, physics);
    h2x::write_predictions_csv(rows, model.membrane_classes, output);
    std::cout << "predict: " << rows.size() << " prediction(s) -> " << output << "\n";
    return 0;
}

int run_extrapolate(const CommonFlags& flags, const std::string& input,
                    double train_max_pressure, const std::string& pressures_arg) {
    const h2x::AppConfig cfg = resolve_config(flags);
    const fs::path dir = ensure_output_dir(flags);

    std::vector<double> pressures;
    std::stringstream ss(pressures_arg);
    std::string token;
    while (std::getline(ss, token, ',')) {
        double v = 0.0;
        if (!h2x::parse_double(token, v)) {
            throw std::runtime_error("extrapolate: bad pressure '" + token + "'");
        }
        pressures.push_back(v);
    }

    const h2x::Dataset ds = h2x::load_csv(input);
    const h2x::ExtrapolationReport report = h2x::extrapolation_study(
        ds, train_max_pressure, pressures, cfg.train, cfg.physics,
        cfg.fusion.fusion_weight);
    h2x::write_extrapolation_csv(report, (dir / "extrapolation.csv").string());

    for (const auto& row : report.rows) {
        std::cout << row.pressure << " bar " << row.method << ": r2="
                  << row.metrics.r2.value_or(0.0) << " rmse=" << row.metrics.rmse
                  << "\n";
    }
    return 0;
}

int run_bench(const CommonFlags& flags, const std::string& checkpoint,
              const std::string& mode, bool float32, const std::string& output) {
    (void)resolve_config(flags);  // validates the config if given
    h2x::BenchOptions opts;
    opts.mode = h2x::bench_mode_from_string(mode);
    opts.use_float32 = float32;
    const h2x::Predictor model = h2x::load_predictor(checkpoint);
    const h2x::BenchReport report = h2x::bench(model, opts);
    if (!output.empty()) h2x::write_bench_json(report, output);
    std::cout << "bench " << to_string(report.mode) << ": mean " << report.mean_us
              << " us, p50 " << report.p50_us << " us, p95 " << report.p95_us
              << " us, p99 " << report.p99_us << " us over " << report.retained
              << " calls\n";
    return 0;
}

int run_report(const std::string& run_dir, const std::string& output) {
    const std::string text = h2x::render_run_report(run_dir);
    if (!output.empty()) {
        std::ofstream out(output);
        if (!out) throw std::runtime_error("report: cannot write " + output);
        out << text;
    }
    std::cout << text;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hydrogen crossover prediction toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;

    // augment
    auto* augment_cmd = app.add_subcommand("augment", "physics-constrained interpolation");
    std::string aug_input, aug_output;
    augment_cmd->add_option("--input", aug_input, "input CSV")->required();
    augment_cmd->add_option("--output", aug_output, "output CSV")->required();
    add_common(augment_cmd, flags, false);

    // train
    auto* train_cmd = app.add_subcommand("train", "train one model");
    std::string train_input;
    train_cmd->add_option("--input", train_input, "training CSV")->required();
    add_common(train_cmd, flags, true);

    // crossval
    auto* cv_cmd = app.add_subcommand("crossval", "k-fold cross-validation");
    std::string cv_input;
    int cv_folds = 5;
    int cv_reps = 20;
    cv_cmd->add_option("--input", cv_input, "training CSV")->required();
    cv_cmd->add_option("--folds", cv_folds, "fold count");
    cv_cmd->add_option("--reps", cv_reps, "repetition count");
    add_common(cv_cmd, flags, true);

    // ensemble
    auto* ens_cmd = app.add_subcommand("ensemble", "deep-ensemble training");
    std::string ens_input;
    int ens_members = 100;
    ens_cmd->add_option("--input", ens_input, "training CSV")->required();
    ens_cmd->add_option("--members", ens_members, "ensemble size");
    add_common(ens_cmd, flags, true);

    // predict
    auto* pred_cmd = app.add_subcommand("predict", "checkpoint-driven prediction");
    std::string pred_ckpt, pred_input, pred_output = "predictions.csv", pred_calibrate;
    std::optional<double> pred_alpha;
    bool pred_no_fusion = false;
    bool pred_no_clamp = false;
    pred_cmd->add_option("--checkpoint", pred_ckpt, "checkpoint file or ensemble dir")
        ->required();
    pred_cmd->add_option("--input", pred_input, "points CSV")->required();
    pred_cmd->add_option("--output", pred_output, "predictions CSV");
    pred_cmd->add_option("--fusion-alpha", pred_alpha, "fusion weight in [0,1]");
    pred_cmd->add_flag("--no-fusion", pred_no_fusion, "skip the physics fusion");
    pred_cmd->add_flag("--no-clamp", pred_no_clamp, "do not floor outputs at 0");
    pred_cmd->add_option("--calibrate-on", pred_calibrate,
                         "fit the cathode solubility on this labeled CSV first");
    add_common(pred_cmd, flags, false);

    // extrapolate
    auto* ext_cmd = app.add_subcommand("extrapolate", "pressure extrapolation study");
    std::string ext_input, ext_pressures = "120,160,200";
    double ext_max_pressure = 80.0;
    ext_cmd->add_option("--input", ext_input, "dataset CSV")->required();
    ext_cmd->add_option("--train-max-pressure", ext_max_pressure,
                        "training pressure ceiling (bar)");
    ext_cmd->add_option("--test-pressures", ext_pressures,
                        "comma-separated test pressures (bar)");
    add_common(ext_cmd, flags, true);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "inference latency benchmark");
    std::string bench_ckpt, bench_mode = "single", bench_output;
    bool bench_f32 = false;
    bench_cmd->add_option("--checkpoint", bench_ckpt, "checkpoint file or ensemble dir")
        ->required();
    bench_cmd->add_option("--mode", bench_mode, "single or batch100")
        ->check(CLI::IsMember({"single", "batch100"}));
    bench_cmd->add_flag("--float32", bench_f32, "single-precision forward pass");
    bench_cmd->add_option("--output", bench_output, "bench JSON path");
    add_common(bench_cmd, flags, false);

    // report
    auto* report_cmd = app.add_subcommand("report", "summarize a run directory");
    std::string report_dir, report_output;
    report_cmd->add_option("--run-dir", report_dir, "directory of result files")
        ->required();
    report_cmd->add_option("--output", report_output, "also write the text here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help() << "\n";
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 2;
    }

    try {
        if (*augment_cmd) return run_augment(flags, aug_input, aug_output);
        if (*train_cmd) return run_train(flags, train_input);
        if (*cv_cmd) return run_crossval(flags, cv_input, cv_folds, cv_reps);
        if (*ens_cmd) return run_ensemble(flags, ens_input, ens_members);
        if (*pred_cmd) {
            return run_predict(flags, pred_ckpt, pred_input, pred_output, pred_alpha,
                               pred_no_fusion, pred_no_clamp, pred_calibrate);
        }
        if (*ext_cmd) {
            return run_extrapolate(flags, ext_input, ext_max_pressure, ext_pressures);
        }
        if (*bench_cmd) {
            return run_bench(flags, bench_ckpt, bench_mode, bench_f32, bench_output);
        }
        if (*report_cmd) return run_report(report_dir, report_output);
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 2;
}
