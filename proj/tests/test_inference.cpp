#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "h2x/bench.hpp"
#include "h2x/config_io.hpp"
#include "h2x/extrapolation.hpp"
#include "h2x/fusion.hpp"
#include "h2x/report_io.hpp"
#include "h2x/rng.hpp"
#include "h2x/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace h2x;

namespace {

struct TempDir {
    std::string path;
    explicit TempDir(const std::string& name) : path(name) {
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

/// Trained single-model checkpoint on synthetic data, saved to a file.
std::string make_checkpoint(const std::string& path, double beta = 0.0,
                            int max_epochs = 20) {
    PhysicsParams physics;
    SyntheticSpec spec;
    spec.n_points = 60;
    const Dataset ds = make_synthetic_dataset(spec, physics);
    const SplitResult parts = stratified_split(ds, SplitSpec{});
    const NormStats stats = compute_norm_stats(encode_dataset(parts.train));

    TrainConfig cfg;
    cfg.physics_weight = beta;
    cfg.max_epochs = max_epochs;
    Mlp model = init_mlp(cfg.base_seed, {kFeatureCount, 16, 16, 1});
    const SupervisedSet train_set = prepare_supervised(parts.train, stats, physics);
    const SupervisedSet val_set = prepare_supervised(parts.val, stats, physics);
    train(model, train_set, val_set, cfg);

    Checkpoint ckpt;
    ckpt.model = std::move(model);
    ckpt.normalization = stats;
    ckpt.membrane_classes = ds.membrane_classes;
    ckpt.metadata["seed"] = static_cast<double>(cfg.base_seed);
    save_checkpoint(ckpt, path);
    return path;
}

} // namespace

TEST_CASE("fusion endpoint identities") {
    CHECK(fuse(2.0, 1.0, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fuse(2.0, 1.0, 1.0) == 2.0);
    CHECK(fuse(2.0, 1.0, 0.0) == 1.0);
    CHECK_THROWS_AS(fuse(1.0, 1.0, 1.5), std::domain_error);

    Rng rng(2);
    for (int k = 0; k < 200; ++k) {
        const double a = rng.uniform(-5.0, 5.0);
        const double b = rng.uniform(-5.0, 5.0);
        CHECK(fuse(a, b, 1.0) == a);
        CHECK(fuse(a, b, 0.0) == b);
        const double alpha = rng.uniform();
        const double f = fuse(a, b, alpha);
        CHECK(f >= std::min(a, b) - 1e-12);
        CHECK(f <= std::max(a, b) + 1e-12);
    }
}

TEST_CASE("solubility calibration recovers a scaled Henry constant") {
    PhysicsParams truth;
    truth.solubility_cathode = 2.3e-6;
    SyntheticSpec spec;
    spec.n_points = 80;
    const Dataset ds = make_synthetic_dataset(spec, truth);

    PhysicsParams base;  // default 1e-6
    const PhysicsParams fitted = calibrate_solubility(base, ds);
    CHECK(fitted.solubility_cathode == doctest::Approx(2.3e-6).epsilon(1e-9));
    // Everything else untouched.
    CHECK(fitted.solubility_anode == base.solubility_anode);
}

TEST_CASE("predict pipeline with a single checkpoint") {
    const std::string path = "test_tmp_predict_ckpt.json";
    make_checkpoint(path);
    const Predictor model = load_predictor(path);
    std::remove(path.c_str());
    CHECK_FALSE(model.is_ensemble());

    PhysicsParams physics;
    SyntheticSpec spec;
    spec.n_points = 10;
    spec.seed = 77;
    const Dataset points = make_synthetic_dataset(spec, physics);

    FusionConfig fusion;
    fusion.enabled = true;
    fusion.fusion_weight = 0.0;  // pure physics endpoint
    const auto rows = predict(model, points, fusion, physics);
    REQUIRE(rows.size() == 10);
    for (const auto& row : rows) {
        const double x = crossover_concentration(row.point, physics).x_h2_cathodic;
        CHECK(*row.y_physics == doctest::Approx(x).epsilon(1e-12));
        CHECK(row.y_final == doctest::Approx(std::max(0.0, x)).epsilon(1e-12));
    }

    // Determinism: identical inputs give identical outputs.
    const auto rows2 = predict(model, points, fusion, physics);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].y_final == rows2[k].y_final);
        CHECK(rows[k].y_network == rows2[k].y_network);
    }
}

TEST_CASE("fusion propagates the zero-current error, fusion-off does not") {
    const std::string path = "test_tmp_predict_i0.json";
    make_checkpoint(path);
    const Predictor model = load_predictor(path);
    std::remove(path.c_str());

    Dataset points;
    points.membrane_classes = model.membrane_classes;
    OperatingPoint pt;
    pt.membrane_id = 0;
    pt.current_density = 0.0;
    points.records.push_back({"s", pt, Provenance::Experimental});

    PhysicsParams physics;
    FusionConfig on;
    CHECK_THROWS_AS(predict(model, points, on, physics), std::domain_error);

    FusionConfig off;
    off.enabled = false;
    const auto rows = predict(model, points, off, physics);
    REQUIRE(rows.size() == 1);
    CHECK_FALSE(rows[0].y_physics.has_value());
    CHECK(std::isfinite(rows[0].y_network));
}

TEST_CASE("clamp floors the presented value, not the raw network output") {
    // A constant net forced negative.
    Mlp m = init_mlp(1, {kFeatureCount, 4, 1});
    for (auto& w : m.weights) w.setZero();
    for (auto& b : m.biases) b.setZero();
    m.biases.back()(0) = -3.0;

    Checkpoint ckpt;
    ckpt.model = m;
    NormStats stats;
    stats.feature_min.setZero();
    stats.feature_max.setOnes();
    ckpt.normalization = stats;
    ckpt.membrane_classes = {"m"};
    const std::string path = "test_tmp_clamp.json";
    save_checkpoint(ckpt, path);
    const Predictor model = load_predictor(path);
    std::remove(path.c_str());

    Dataset points;
    points.membrane_classes = {"m"};
    OperatingPoint pt;
    pt.membrane_id = 0;
    pt.current_density = 0.5;
    points.records.push_back({"s", pt, Provenance::Experimental});

    FusionConfig cfg;
    cfg.enabled = false;
    cfg.clamp_output = true;
    const auto rows = predict(model, points, cfg, PhysicsParams{});
    CHECK(rows[0].y_network == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(rows[0].y_final == 0.0);
}

TEST_CASE("bench retains the post-warm-up calls with ordered percentiles") {
    const std::string path = "test_tmp_bench.json";
    make_checkpoint(path, 0.0, 3);
    const Predictor model = load_predictor(path);
    std::remove(path.c_str());

    BenchOptions opts;
    opts.n_total = 300;
    opts.n_warmup = 50;
    const BenchReport report = bench(model, opts);
    CHECK(report.retained == 250);
    CHECK(report.p50_us <= report.p95_us);
    CHECK(report.p95_us <= report.p99_us);
    CHECK(report.mean_us > 0.0);
    CHECK(report.total_us >= report.mean_us * 249);

    BenchOptions batch = opts;
    batch.mode = BenchMode::Batch100;
    const BenchReport breport = bench(model, batch);
    CHECK(breport.retained == 250);
    // Amortization: a 100-row batch is far cheaper than 100 single calls.
    CHECK(breport.mean_us < 100.0 * report.mean_us);

    BenchOptions f32 = opts;
    f32.use_float32 = true;
    CHECK(bench(model, f32).retained == 250);

    BenchOptions bad = opts;
    bad.n_warmup = 300;
    CHECK_THROWS_AS(bench(model, bad), std::invalid_argument);
}

TEST_CASE("extrapolation study produces the three-method table") {
    PhysicsParams physics;
    PressureGridSpec grid;
    grid.pressures = {1.0, 6.0, 20.0, 40.0, 80.0, 120.0};
    grid.currents_per_pressure = 8;
    const Dataset ds = make_pressure_grid_dataset(grid, physics);

    TrainConfig cfg;
    cfg.max_epochs = 10;
    const ExtrapolationReport report =
        extrapolation_study(ds, 80.0, {120.0}, cfg, physics, 0.5);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].method == "nn");
    CHECK(report.rows[1].method == "pinn");
    CHECK(report.rows[2].method == "fusion");
    for (const auto& row : report.rows) {
        CHECK(row.pressure == 120.0);
        CHECK(row.n_points == 8);
        CHECK(std::isfinite(row.metrics.rmse));
    }

    CHECK_THROWS_AS(extrapolation_study(ds, 80.0, {150.0}, cfg, physics, 0.5),
                    std::runtime_error);
}

TEST_CASE("config files parse with defaults and validation") {
    const std::string path = "test_tmp_config.json";
    {
        std::ofstream out(path);
        out << R"({"physics": {"darcy_coeff": 2e-5, "sat_pressure_model": "antoine"},
                   "train": {"lr": 1e-3, "plateau": {"patience": 25}},
                   "fusion": {"fusion_weight": 0.25}})";
    }
    const AppConfig cfg = load_config(path);
    std::remove(path.c_str());
    CHECK(cfg.physics.darcy_coeff == 2e-5);
    CHECK(cfg.physics.sat_pressure_model == SatPressureModel::Antoine);
    CHECK(cfg.physics.porosity == 0.28);  // untouched default
    CHECK(cfg.train.lr == 1e-3);
    CHECK(cfg.train.plateau.patience == 25);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.fusion.fusion_weight == 0.25);
    CHECK(cfg.augment.max_points_per_gap == 10);

    // Round-trip through save/load.
    const std::string path2 = "test_tmp_config2.json";
    save_config(cfg, path2);
    const AppConfig back = load_config(path2);
    std::remove(path2.c_str());
    CHECK(back.physics.darcy_coeff == 2e-5);
    CHECK(back.fusion.fusion_weight == 0.25);

    // Invalid values are rejected at load time.
    const std::string bad = "test_tmp_config_bad.json";
    {
        std::ofstream out(bad);
        out << R"({"train": {"physics_weight": 1.5}})";
    }
    CHECK_THROWS_AS(load_config(bad), std::domain_error);
    std::remove(bad.c_str());
}

TEST_CASE("run report rendering is byte-identical across invocations") {
    TempDir dir("test_tmp_rundir");
    {
        BenchReport report{};
        report.mode = BenchMode::Single;
        report.n_total = 1000;
        report.n_warmup = 100;
        report.retained = 900;
        report.mean_us = 123.456;
        report.p50_us = 120.0;
        report.p95_us = 150.0;
        report.p99_us = 180.0;
        write_bench_json(report, dir.path + "/bench.json");
        std::ofstream csv(dir.path + "/cv_results.csv");
        csv << "rep,fold\n0,0\n0,1\n";
    }
    const std::string a = render_run_report(dir.path);
    const std::string b = render_run_report(dir.path);
    CHECK(a == b);
    CHECK(a.find("bench") != std::string::npos);
    CHECK(a.find("cv_results.csv: 2 row(s)") != std::string::npos);
}
