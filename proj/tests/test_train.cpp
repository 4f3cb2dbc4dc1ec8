#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "h2x/rng.hpp"
#include "h2x/synthetic.hpp"
#include "h2x/train.hpp"

#include <cmath>
#include <limits>
#include <set>

using namespace h2x;

namespace {

/// Small oracle-labeled problem with fitted stats, ready to train on.
struct Problem {
    Dataset ds;
    NormStats stats;
    SupervisedSet train_set;
    SupervisedSet val_set;
    SupervisedSet test_set;
};

Problem make_problem(int n_points, std::uint64_t seed = 7, double noise = 0.0) {
    PhysicsParams physics;
    SyntheticSpec spec;
    spec.n_points = n_points;
    spec.seed = seed;
    spec.noise_std = noise;
    Problem prob;
    prob.ds = make_synthetic_dataset(spec, physics);
    SplitSpec split;
    const SplitResult parts = stratified_split(prob.ds, split);
    prob.stats = compute_norm_stats(encode_dataset(parts.train));
    prob.train_set = prepare_supervised(parts.train, prob.stats, physics);
    prob.val_set = prepare_supervised(parts.val, prob.stats, physics);
    prob.test_set = prepare_supervised(parts.test, prob.stats, physics);
    return prob;
}

} // namespace

TEST_CASE("data loss is plain mean squared error") {
    Vector a(3), b(3);
    a << 1, 2, 3;
    b = a;
    CHECK(data_loss(a, b) == 0.0);

    b.array() -= 1.0;
    CHECK(data_loss(a, b) == doctest::Approx(1.0).epsilon(1e-12));

    Vector p(2), l(2);
    p << 0, 2;
    l << 0, 0;
    CHECK(data_loss(p, l) == doctest::Approx(2.0).epsilon(1e-12));

    Vector wrong(4);
    CHECK_THROWS_AS(data_loss(a, wrong), std::invalid_argument);
}

TEST_CASE("physics loss vanishes on the oracle and scores unit offsets at 1/11") {
    const Problem prob = make_problem(40);
    const Vector on_oracle = prob.train_set.oracle_x;
    CHECK(physics_loss(prob.train_set, on_oracle) < 1e-24);

    const Vector off = on_oracle.array() + 1.0;
    CHECK(physics_loss(prob.train_set, off) == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("physics loss gradient matches finite differences") {
    const Problem prob = make_problem(30);
    Rng rng(11);
    Vector pred(prob.train_set.n());
    for (Eigen::Index k = 0; k < pred.size(); ++k) pred(k) = rng.uniform(0.0, 5.0);

    Eigen::Index n_valid = 0;
    for (auto v : prob.train_set.oracle_valid) n_valid += v;
    REQUIRE(n_valid == prob.train_set.n());

    const double h = 1e-6;
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(pred.size(), 10); ++k) {
        Vector up = pred, down = pred;
        up(k) += h;
        down(k) -= h;
        const double fd =
            (physics_loss(prob.train_set, up) - physics_loss(prob.train_set, down)) /
            (2.0 * h);
        const double analytic = (2.0 / 11.0) * (pred(k) - prob.train_set.oracle_x(k)) /
                                static_cast<double>(n_valid);
        CHECK(std::abs(fd - analytic) <= 1e-6 * std::max(std::abs(analytic), 1e-8));
    }
}

TEST_CASE("records at zero current are excluded from the physics term") {
    Dataset ds;
    ds.membrane_classes = {"m"};
    for (double i : {0.0, 1.0, 2.0}) {
        OperatingPoint pt;
        pt.membrane_id = 0;
        pt.current_density = i;
        pt.h2_concentration = 1.0;
        ds.records.push_back({"s", pt, Provenance::Experimental});
    }
    const NormStats stats = compute_norm_stats(encode_dataset(ds));
    const SupervisedSet set = prepare_supervised(ds, stats, PhysicsParams{});
    CHECK(set.oracle_excluded == 1);
    CHECK(set.oracle_valid[0] == 0);
    CHECK(set.oracle_valid[1] == 1);

    // The excluded record contributes nothing.
    Vector pred = set.oracle_x;
    pred(0) = 123.0;
    CHECK(physics_loss(set, pred) < 1e-24);
}

TEST_CASE("pinn residual diagnostics expose the crossover term") {
    PhysicsParams p;
    OperatingPoint pt;
    pt.pressure_cathode = 10.0;
    pt.current_density = 1.0;
    const double x = crossover_concentration(pt, p).x_h2_cathodic;
    const Residuals11 r = pinn_residuals(pt, x + 2.0, p);
    CHECK(r(10) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.head<10>().maxCoeff() < 1e-24);
    CHECK(r.mean() == doctest::Approx(4.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("total loss is the exact convex combination") {
    CHECK(total_loss(1.0, 2.0, 0.3) == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(total_loss(1.0, 2.0, 0.0) == 1.0);
    CHECK(total_loss(1.0, 2.0, 1.0) == 2.0);
}

TEST_CASE("adam first step applies the bias-corrected update") {
    Mlp m;
    m.layer_sizes = {1, 1};
    m.weights.push_back(Matrix::Zero(1, 1));
    m.biases.push_back(Vector::Zero(1));

    Gradients g = make_gradients(m);
    g.weights[0](0, 0) = 1.0;
    AdamState state = make_adam_state(m);
    AdamMoments moments;
    adam_step(m, g, state, 5.5e-3, moments);

    // m_hat = v_hat = 1 after the first unit-gradient step.
    const double expected = -5.5e-3 / (1.0 + 1e-8);
    CHECK(m.weights[0](0, 0) == doctest::Approx(expected).epsilon(1e-12));

    // Zero gradients from a fresh state leave parameters untouched.
    Mlp idle;
    idle.layer_sizes = {1, 1};
    idle.weights.push_back(Matrix::Constant(1, 1, 0.75));
    idle.biases.push_back(Vector::Zero(1));
    AdamState idle_state = make_adam_state(idle);
    Gradients zero = make_gradients(idle);
    for (int step = 0; step < 3; ++step) {
        adam_step(idle, zero, idle_state, 5.5e-3, moments);
        CHECK(idle.weights[0](0, 0) == 0.75);
    }

    // Constant positive gradient keeps moving the parameter down.
    Mlp walker;
    walker.layer_sizes = {1, 1};
    walker.weights.push_back(Matrix::Zero(1, 1));
    walker.biases.push_back(Vector::Zero(1));
    AdamState ws = make_adam_state(walker);
    double prev = 0.0;
    for (int step = 0; step < 5; ++step) {
        Gradients cg = make_gradients(walker);
        cg.weights[0](0, 0) = 2.0;
        adam_step(walker, cg, ws, 1e-2, moments);
        CHECK(walker.weights[0](0, 0) < prev);
        prev = walker.weights[0](0, 0);
    }
}

TEST_CASE("plateau scheduler halves after the patience window") {
    PlateauSpec spec;  // factor 0.5, patience 50, floor 1e-6
    PlateauScheduler sched(5.5e-3, spec);
    sched.observe(1.0);  // establishes the best
    for (int k = 0; k < 49; ++k) {
        CHECK(sched.observe(1.0) == doctest::Approx(5.5e-3));
    }
    CHECK(sched.observe(1.0) == doctest::Approx(2.75e-3));

    // An improvement at epoch 49 resets the counter.
    PlateauScheduler sched2(5.5e-3, spec);
    sched2.observe(1.0);
    for (int k = 0; k < 48; ++k) sched2.observe(1.0);
    CHECK(sched2.observe(0.5) == doctest::Approx(5.5e-3));
    for (int k = 0; k < 49; ++k) {
        CHECK(sched2.observe(0.5) == doctest::Approx(5.5e-3));
    }
    CHECK(sched2.observe(0.5) == doctest::Approx(2.75e-3));

    // Reductions clamp at the floor.
    PlateauSpec tight;
    tight.patience = 1;
    PlateauScheduler sched3(1.5e-6, tight);
    sched3.observe(1.0);
    CHECK(sched3.observe(1.0) == doctest::Approx(1e-6));
    CHECK(sched3.observe(1.0) == doctest::Approx(1e-6));
}

TEST_CASE("early stopping arithmetic") {
    EarlyStopSpec spec;
    spec.patience = 150;
    spec.min_delta = std::numeric_limits<double>::infinity();
    EarlyStopper stopper(spec);
    int epoch = 0;
    bool stopped = false;
    while (!stopped && epoch < 1000) {
        ++epoch;
        stopped = stopper.observe(1.0 / epoch);  // always improving, never enough
    }
    CHECK(epoch == 151);  // initial epoch + 150 patience

    EarlyStopSpec normal;
    normal.patience = 3;
    normal.min_delta = 1e-6;
    EarlyStopper s2(normal);
    CHECK_FALSE(s2.observe(1.0));
    CHECK_FALSE(s2.observe(0.5));   // improvement
    CHECK_FALSE(s2.observe(0.5));   // stall 1
    CHECK_FALSE(s2.observe(0.5));   // stall 2
    CHECK(s2.observe(0.5));         // stall 3 -> stop
}

TEST_CASE("metrics definitions") {
    Vector label(4);
    label << 1, 2, 3, 4;
    const Metrics perfect = compute_metrics(label, label);
    CHECK(perfect.r2.value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.mape == 0.0);

    Vector mean_pred = Vector::Constant(4, label.mean());
    CHECK(compute_metrics(mean_pred, label).r2.value() ==
          doctest::Approx(0.0).epsilon(1e-12));

    Vector p(2), l(2);
    p << 1, 3;
    l << 2, 2;
    const Metrics m = compute_metrics(p, l);
    CHECK_FALSE(m.r2.has_value());
    CHECK(m.rmse == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.mae == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.mape == doctest::Approx(50.0).epsilon(1e-12));

    Vector with_zero(3), pred3(3);
    with_zero << 0, 1, 2;
    pred3 << 0.5, 1.1, 2.2;
    CHECK(compute_metrics(pred3, with_zero).mape_skipped == 1);

    // Zero-variance labels: RMSE/MAE/MAPE stay defined, R^2 does not.
    Vector flat = Vector::Constant(3, 2.0);
    const Metrics undef = compute_metrics(pred3, flat);
    CHECK_FALSE(undef.r2.has_value());
    CHECK(undef.rmse > 0.0);
    Vector one(1), one2(1);
    CHECK_THROWS_AS(compute_metrics(one, one2), std::invalid_argument);
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
    const Problem prob = make_problem(60);
    TrainConfig cfg;
    cfg.max_epochs = 40;
    cfg.base_seed = 42;

    Mlp a = init_mlp(cfg.base_seed, {kFeatureCount, 16, 16, 1});
    Mlp b = init_mlp(cfg.base_seed, {kFeatureCount, 16, 16, 1});
    const TrainReport ra = train(a, prob.train_set, prob.val_set, cfg);
    const TrainReport rb = train(b, prob.train_set, prob.val_set, cfg);

    for (std::size_t l = 0; l < a.layer_count(); ++l) {
        CHECK(a.weights[l] == b.weights[l]);
        CHECK(a.biases[l] == b.biases[l]);
    }
    REQUIRE(ra.epochs.size() == rb.epochs.size());
    for (std::size_t e = 0; e < ra.epochs.size(); ++e) {
        CHECK(ra.epochs[e].train_loss == rb.epochs[e].train_loss);
        CHECK(ra.epochs[e].val_loss == rb.epochs[e].val_loss);
        CHECK(ra.epochs[e].lr == rb.epochs[e].lr);
    }
}

TEST_CASE("training reduces the loss and restores the best-validation model") {
    const Problem prob = make_problem(80);
    TrainConfig cfg;
    cfg.physics_weight = 0.0;
    cfg.max_epochs = 150;

    Mlp model = init_mlp(1, {kFeatureCount, 32, 32, 1});
    const Vector before = batch_forward(model, prob.val_set.features);
    const double loss_before = data_loss(before, prob.val_set.labels);

    const TrainReport report = train(model, prob.train_set, prob.val_set, cfg);
    const Vector after = batch_forward(model, prob.val_set.features);
    const double loss_after = data_loss(after, prob.val_set.labels);

    CHECK(loss_after < 0.1 * loss_before);

    // The restored parameters reproduce the best epoch's validation loss.
    double best_seen = std::numeric_limits<double>::infinity();
    for (const auto& e : report.epochs) best_seen = std::min(best_seen, e.val_loss);
    CHECK(loss_after == doctest::Approx(best_seen).epsilon(1e-12));
    CHECK(report.best_val_loss == doctest::Approx(best_seen).epsilon(1e-12));
    CHECK(loss_after <= report.epochs.back().val_loss + 1e-15);
}

TEST_CASE("divergent runs abort with a diagnostic") {
    const Problem prob = make_problem(30);
    TrainConfig cfg;
    cfg.lr = 1e200;
    cfg.max_epochs = 10;
    Mlp model = init_mlp(5, {kFeatureCount, 16, 16, 1});
    CHECK_THROWS_AS(train(model, prob.train_set, prob.val_set, cfg), TrainingDiverged);
}

TEST_CASE("cross-validation seed ledger follows the formula") {
    CvPlan plan;
    CHECK(plan.seed(42, 2, 3) == 55);
    CHECK(plan.seed(42, 0, 0) == 42);
    CHECK(plan.seed(42, 19, 4) == 42 + 19 * 5 + 4);
}

TEST_CASE("cross-validation runs the full grid deterministically") {
    const Problem prob = make_problem(60);
    TrainConfig cfg;
    cfg.max_epochs = 5;  // the ledger and shape matter here, not accuracy
    CvPlan plan;
    plan.folds = 2;
    plan.repetitions = 2;

    const CvReport report = cross_validate(prob.ds, cfg, plan, PhysicsParams{}, 2);
    REQUIRE(report.rows.size() == 4);
    std::set<std::uint64_t> seeds;
    for (const auto& row : report.rows) seeds.insert(row.seed);
    CHECK(seeds == std::set<std::uint64_t>{42, 43, 44, 45});
    CHECK(report.rows[0].rep == 0);
    CHECK(report.rows[0].fold == 0);
    CHECK(report.rows[3].rep == 1);
    CHECK(report.rows[3].fold == 1);
    CHECK(std::isfinite(report.summary.r2_mean));
    for (const auto& row : report.rows) CHECK(row.metrics.r2.has_value());
    CHECK(report.summary.rmse_std >= 0.0);

    // Same call again: identical rows regardless of worker count.
    const CvReport again = cross_validate(prob.ds, cfg, plan, PhysicsParams{}, 1);
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        CHECK(report.rows[k].metrics.r2.value() == again.rows[k].metrics.r2.value());
        CHECK(report.rows[k].stop_epoch == again.rows[k].stop_epoch);
    }
}
