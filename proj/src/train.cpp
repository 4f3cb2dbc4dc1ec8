#include "h2x/train.hpp"

#include "h2x/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <atomic>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace h2x {

void TrainConfig::validate() const {
    if (!(physics_weight >= 0.0 && physics_weight <= 1.0)) {
        throw std::domain_error("TrainConfig: physics_weight outside [0, 1]");
    }
    if (!(lr > plateau.lr_min)) {
        throw std::domain_error("TrainConfig: lr must exceed plateau.lr_min");
    }
    if (batch_size < 1) throw std::domain_error("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw std::domain_error("TrainConfig: max_epochs must be >= 1");
    if (plateau.patience < 1 || early_stop.patience < 1) {
        throw std::domain_error("TrainConfig: patiences must be >= 1");
    }
}

SupervisedSet prepare_supervised(const Dataset& ds, const NormStats& stats,
                                 const PhysicsParams& physics) {
    SupervisedSet set;
    set.features = normalize_features(encode_dataset(ds), stats);
    set.labels = labels(ds);
    const Eigen::Index n = set.features.rows();
    set.oracle_x = Vector::Zero(n);
    set.residual_static = Vector::Zero(n);
    set.oracle_valid.assign(static_cast<std::size_t>(n), 1);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& pt = ds.records[static_cast<std::size_t>(r)].point;
        if (pt.current_density <= 0.0) {
            set.oracle_valid[static_cast<std::size_t>(r)] = 0;
            ++set.oracle_excluded;
            continue;
        }
        const TransportState state = crossover_concentration(pt, physics);
        set.oracle_x(r) = state.x_h2_cathodic;
        // The ten state constraints, evaluated for real rather than assumed
        // zero; their sum rides along in the physics loss.
        Residuals11 res = physics_residuals(pt, state, physics);
        set.residual_static(r) = res.head<10>().sum();
    }
    return set;
}

double data_loss(const Vector& pred, const Vector& label) {
    if (pred.size() != label.size()) {
        throw std::invalid_argument("data_loss: length mismatch");
    }
    if (pred.size() == 0) {
        throw std::invalid_argument("data_loss: empty vectors");
    }
    return (pred - label).squaredNorm() / static_cast<double>(pred.size());
}

double physics_loss(const SupervisedSet& batch, const Vector& pred) {
    if (pred.size() != batch.n()) {
        throw std::invalid_argument("physics_loss: prediction count mismatch");
    }
    double sum = 0.0;
    Eigen::Index used = 0;
    for (Eigen::Index r = 0; r < batch.n(); ++r) {
        if (!batch.oracle_valid[static_cast<std::size_t>(r)]) continue;
        const double dev = pred(r) - batch.oracle_x(r);
        sum += (batch.residual_static(r) + dev * dev) / 11.0;
        ++used;
    }
    return used > 0 ? sum / static_cast<double>(used) : 0.0;
}

Residuals11 pinn_residuals(const OperatingPoint& pt, double y_hat,
                           const PhysicsParams& physics) {
    TransportState state = crossover_concentration(pt, physics);
    state.x_h2_cathodic = y_hat;
    return physics_residuals(pt, state, physics);
}

double total_loss(double data, double physics, double beta) {
    return (1.0 - beta) * data + beta * physics;
}

AdamState make_adam_state(const Mlp& model) {
    return {make_gradients(model), make_gradients(model), 0};
}

void adam_step(Mlp& params, const Gradients& grads, AdamState& state, double lr,
               const AdamMoments& mom) {
    state.step += 1;
    const double corr1 = 1.0 - std::pow(mom.gamma1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(mom.gamma2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
            m.array() = mom.gamma1 * m.array() + (1.0 - mom.gamma1) * g.array();
            v.array() = mom.gamma2 * v.array() + (1.0 - mom.gamma2) * g.array().square();
            p.array() -=
                lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + mom.epsilon);
        };
        update(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
        update(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
    }
}

PlateauScheduler::PlateauScheduler(double initial_lr, const PlateauSpec& spec)
    : lr_(initial_lr), spec_(spec), best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::observe(double val_loss) {
    if (val_loss < best_) {
        best_ = val_loss;
        stall_ = 0;
    } else {
        ++stall_;
    }
    if (stall_ >= spec_.patience) {
        lr_ = std::max(lr_ * spec_.factor, spec_.lr_min);
        stall_ = 0;
    }
    return lr_;
}

EarlyStopper::EarlyStopper(const EarlyStopSpec& spec)
    : spec_(spec), best_(std::numeric_limits<double>::infinity()) {}

bool EarlyStopper::observe(double val_loss) {
    if (!primed_) {
        primed_ = true;
        best_ = val_loss;
        stall_ = 0;
        return false;
    }
    if (best_ - val_loss > spec_.min_delta) {
        best_ = val_loss;
        stall_ = 0;
    } else {
        ++stall_;
    }
    return stall_ >= spec_.patience;
}

Metrics compute_metrics(const Vector& pred, const Vector& label) {
    if (pred.size() != label.size()) {
        throw std::invalid_argument("compute_metrics: length mismatch");
    }
    const Eigen::Index n = pred.size();
    if (n < 2) {
        throw std::invalid_argument("compute_metrics: need at least 2 samples");
    }
    const double mean = label.mean();
    const double ss_tot = (label.array() - mean).square().sum();
    const Vector err = pred - label;
    Metrics m;
    if (ss_tot > 0.0) {
        m.r2 = 1.0 - err.squaredNorm() / ss_tot;
    }
    m.rmse = std::sqrt(err.squaredNorm() / static_cast<double>(n));
    m.mae = err.array().abs().mean();
    double mape_sum = 0.0;
    int mape_n = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (label(k) == 0.0) continue;
        mape_sum += std::abs(err(k) / label(k));
        ++mape_n;
    }
    m.mape_skipped = static_cast<int>(n) - mape_n;
    m.mape = mape_n > 0 ? mape_sum / mape_n * 100.0 : 0.0;
    return m;
}

namespace {

SupervisedSet gather(const SupervisedSet& set, const std::vector<std::size_t>& idx) {
    SupervisedSet out;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), set.features.cols());
    out.labels.resize(static_cast<Eigen::Index>(idx.size()));
    out.oracle_x.resize(static_cast<Eigen::Index>(idx.size()));
    out.residual_static.resize(static_cast<Eigen::Index>(idx.size()));
    out.oracle_valid.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(idx[k]);
        out.features.row(static_cast<Eigen::Index>(k)) = set.features.row(r);
        out.labels(static_cast<Eigen::Index>(k)) = set.labels(r);
        out.oracle_x(static_cast<Eigen::Index>(k)) = set.oracle_x(r);
        out.residual_static(static_cast<Eigen::Index>(k)) = set.residual_static(r);
        out.oracle_valid[k] = set.oracle_valid[idx[k]];
    }
    return out;
}

} // namespace

TrainReport train(Mlp& model, const SupervisedSet& train_set, const SupervisedSet& val_set,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.n() == 0 || val_set.n() == 0) {
        throw std::invalid_argument("train: empty train or validation set");
    }

    TrainReport report;
    report.config = cfg;

    Rng shuffle_rng(cfg.base_seed);
    AdamState adam = make_adam_state(model);
    PlateauScheduler scheduler(cfg.lr, cfg.plateau);
    EarlyStopper stopper(cfg.early_stop);
    const double beta = cfg.physics_weight;

    Mlp best_model = model;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;

    std::vector<std::size_t> order(static_cast<std::size_t>(train_set.n()));
    std::iota(order.begin(), order.end(), 0);

    double lr = cfg.lr;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::vector<std::size_t> batch_idx(order.begin() + start,
                                                     order.begin() + stop);
            const SupervisedSet batch = gather(train_set, batch_idx);
            const Eigen::Index nb = batch.n();

            ForwardCache cache = batch_forward_cached(model, batch.features);
            Eigen::Index physics_n = 0;
            for (auto v : batch.oracle_valid) physics_n += v;

            // dL/dy per sample: data term plus the crossover-constraint term.
            Vector upstream =
                (1.0 - beta) * 2.0 * (cache.outputs - batch.labels) /
                static_cast<double>(nb);
            if (beta > 0.0 && physics_n > 0) {
                for (Eigen::Index k = 0; k < nb; ++k) {
                    if (!batch.oracle_valid[static_cast<std::size_t>(k)]) continue;
                    upstream(k) += beta * (2.0 / 11.0) *
                                   (cache.outputs(k) - batch.oracle_x(k)) /
                                   static_cast<double>(physics_n);
                }
            }
            const Gradients grads = batch_backward(model, cache, upstream);
            adam_step(model, grads, adam, lr, cfg.adam_moments);
        }

        const Vector train_pred = batch_forward(model, train_set.features);
        const double train_total =
            total_loss(data_loss(train_pred, train_set.labels),
                       physics_loss(train_set, train_pred), beta);
        const Vector val_pred = batch_forward(model, val_set.features);
        const double val = data_loss(val_pred, val_set.labels);

        if (!std::isfinite(train_total) || !std::isfinite(val)) {
            throw TrainingDiverged("train: non-finite loss at epoch " +
                                   std::to_string(epoch) + " (train=" +
                                   std::to_string(train_total) + ", val=" +
                                   std::to_string(val) + ")");
        }

        report.epochs.push_back({train_total, val, lr});
        if (val < best_val) {
            best_val = val;
            best_model = model;
            best_epoch = epoch;
        }
        lr = scheduler.observe(val);
        if (stopper.observe(val)) {
            report.stop_epoch = epoch;
            break;
        }
        report.stop_epoch = epoch;
    }

    model = best_model;
    report.best_epoch = best_epoch;
    report.best_val_loss = best_val;
    return report;
}

namespace {

struct CvRun {
    int rep;
    int fold;
    std::uint64_t seed;
};

} // namespace

CvReport cross_validate(const Dataset& ds, const TrainConfig& cfg, const CvPlan& plan,
                        const PhysicsParams& physics, int jobs,
                        const std::function<void(const CvRow&)>& on_row) {
    cfg.validate();
    if (plan.folds < 2 || plan.repetitions < 1) {
        throw std::domain_error("cross_validate: need folds >= 2 and repetitions >= 1");
    }

    std::vector<CvRun> runs;
    for (int rep = 0; rep < plan.repetitions; ++rep) {
        for (int fold = 0; fold < plan.folds; ++fold) {
            runs.push_back({rep, fold, plan.seed(cfg.base_seed, rep, fold)});
        }
    }

    std::vector<CvRow> rows(runs.size());
    std::mutex progress_mutex;

    auto execute = [&](std::size_t run_idx) {
        const CvRun& run = runs[run_idx];
        // Fold assignment is fixed per repetition (the fold-0 seed), so the
        // five folds of one repetition partition the same shuffle.
        const auto folds =
            stratified_kfold(ds, plan.folds, plan.seed(cfg.base_seed, run.rep, 0));

        std::vector<std::size_t> rest;
        for (int f = 0; f < plan.folds; ++f) {
            if (f == run.fold) continue;
            rest.insert(rest.end(), folds[f].begin(), folds[f].end());
        }
        std::sort(rest.begin(), rest.end());
        Dataset trainval = subset(ds, rest);
        Dataset test = subset(ds, folds[run.fold]);

        // Carve the validation share out of the remaining 80% so the overall
        // proportions match the 70/10/20 protocol.
        SplitSpec inner;
        inner.train_frac = 0.875;
        inner.val_frac = 0.125;
        inner.test_frac = 0.0;
        inner.seed = run.seed;
        const SplitResult parts = stratified_split(trainval, inner);

        const NormStats stats = compute_norm_stats(encode_dataset(parts.train));
        const SupervisedSet train_set = prepare_supervised(parts.train, stats, physics);
        const SupervisedSet val_set = prepare_supervised(parts.val, stats, physics);
        const SupervisedSet test_set = prepare_supervised(test, stats, physics);

        TrainConfig run_cfg = cfg;
        run_cfg.base_seed = run.seed;
        Mlp model = init_mlp(run.seed, {kFeatureCount, 128, 128, 1});
        const TrainReport rep_report = train(model, train_set, val_set, run_cfg);

        const Vector pred = batch_forward(model, test_set.features);
        CvRow row;
        row.rep = run.rep;
        row.fold = run.fold;
        row.seed = run.seed;
        row.beta = cfg.physics_weight;
        row.metrics = compute_metrics(pred, test_set.labels);
        row.stop_epoch = rep_report.stop_epoch;
        rows[run_idx] = row;
        if (on_row) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            on_row(row);
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (std::size_t k = 0; k < runs.size(); ++k) execute(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t k = next.fetch_add(1); k < runs.size();
                     k = next.fetch_add(1)) {
                    execute(k);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    CvReport report;
    report.rows = std::move(rows);
    auto stat = [&](auto getter, double& mean, double& stddev) {
        double sum = 0.0;
        for (const auto& row : report.rows) sum += getter(row);
        mean = sum / static_cast<double>(report.rows.size());
        double sq = 0.0;
        for (const auto& row : report.rows) {
            const double d = getter(row) - mean;
            sq += d * d;
        }
        stddev = std::sqrt(sq / static_cast<double>(report.rows.size()));
    };
    stat([](const CvRow& r) { return r.metrics.r2.value(); }, report.summary.r2_mean,
         report.summary.r2_std);
    stat([](const CvRow& r) { return r.metrics.rmse; }, report.summary.rmse_mean,
         report.summary.rmse_std);
    stat([](const CvRow& r) { return r.metrics.mae; }, report.summary.mae_mean,
         report.summary.mae_std);
    stat([](const CvRow& r) { return r.metrics.mape; }, report.summary.mape_mean,
         report.summary.mape_std);
    return report;
}

} // namespace h2x
