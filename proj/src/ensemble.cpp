#include "h2x/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace h2x {

namespace fs = std::filesystem;

EnsembleTrainResult train_ensemble(const Dataset& ds, const TrainConfig& cfg,
                                   int n_members, const PhysicsParams& physics,
                                   const SplitSpec& split, int jobs) {
    if (n_members < 2) {
        throw std::domain_error("train_ensemble: need at least 2 members");
    }
    cfg.validate();

    SplitSpec shared_split = split;
    shared_split.seed = cfg.base_seed;
    EnsembleTrainResult result;
    SplitResult parts = stratified_split(ds, shared_split);
    result.warnings = parts.warnings;

    const NormStats stats = compute_norm_stats(encode_dataset(parts.train));
    const SupervisedSet train_set = prepare_supervised(parts.train, stats, physics);
    const SupervisedSet val_set = prepare_supervised(parts.val, stats, physics);

    std::vector<std::optional<Mlp>> trained(static_cast<std::size_t>(n_members));
    std::vector<std::string> member_warnings(static_cast<std::size_t>(n_members));

    auto run_member = [&](int idx) {
        const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(idx);
        TrainConfig member_cfg = cfg;
        member_cfg.base_seed = seed;
        Mlp model = init_mlp(seed, {kFeatureCount, 128, 128, 1});
        try {
            train(model, train_set, val_set, member_cfg);
            trained[static_cast<std::size_t>(idx)] = std::move(model);
        } catch (const TrainingDiverged& e) {
            member_warnings[static_cast<std::size_t>(idx)] =
                "member seed " + std::to_string(seed) + " diverged: " + e.what();
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (int k = 0; k < n_members; ++k) run_member(k);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < std::min(jobs, n_members); ++w) {
            workers.emplace_back([&] {
                for (int k = next.fetch_add(1); k < n_members; k = next.fetch_add(1)) {
                    run_member(k);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    EnsembleModel& model = result.model;
    model.normalization = stats;
    model.membrane_classes = ds.membrane_classes;
    model.physics_weight = cfg.physics_weight;
    for (int k = 0; k < n_members; ++k) {
        const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(k);
        if (trained[static_cast<std::size_t>(k)]) {
            model.members.push_back(std::move(*trained[static_cast<std::size_t>(k)]));
            model.member_seeds.push_back(seed);
        } else {
            model.excluded_seeds.push_back(seed);
            result.warnings.push_back(member_warnings[static_cast<std::size_t>(k)]);
        }
    }
    if (model.members.empty()) {
        throw std::runtime_error("train_ensemble: every member diverged");
    }

    result.train = std::move(parts.train);
    result.val = std::move(parts.val);
    result.test = std::move(parts.test);
    return result;
}

double ensemble_mean(const EnsembleModel& e, const Vector& normalized_features) {
    double sum = 0.0;
    for (const auto& m : e.members) {
        sum += forward<double>(m, normalized_features);
    }
    return sum / static_cast<double>(e.members.size());
}

Matrix ensemble_member_predictions(const EnsembleModel& e, const Matrix& normalized) {
    Matrix out(normalized.rows(), static_cast<Eigen::Index>(e.members.size()));
    for (std::size_t k = 0; k < e.members.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = batch_forward(e.members[k], normalized);
    }
    return out;
}

PredictionWithUncertainty predict_with_uncertainty(const EnsembleModel& e,
                                                   const OperatingPoint& pt) {
    if (e.members.empty()) {
        throw std::runtime_error("predict_with_uncertainty: empty ensemble");
    }
    const Vector8 x = normalize_features(
        encode_features(pt, static_cast<int>(e.membrane_classes.size())),
        e.normalization);
    PredictionWithUncertainty p;
    p.member_values.resize(static_cast<Eigen::Index>(e.members.size()));
    for (std::size_t k = 0; k < e.members.size(); ++k) {
        p.member_values(static_cast<Eigen::Index>(k)) =
            forward<double>(e.members[k], x);
    }
    const auto n = static_cast<double>(p.member_values.size());
    p.mean = p.member_values.mean();
    p.stddev = std::sqrt((p.member_values.array() - p.mean).square().sum() / n);
    p.ci95 = {p.mean - 1.96 * p.stddev, p.mean + 1.96 * p.stddev};
    return p;
}

CalibrationReport calibration(const EnsembleModel& e, const Dataset& test) {
    if (test.empty()) {
        throw std::runtime_error("calibration: empty test set");
    }
    const Matrix features = normalize_features(encode_dataset(test), e.normalization);
    const Vector y = labels(test);
    const Matrix member_pred = ensemble_member_predictions(e, features);

    const Vector mu = member_pred.rowwise().mean();
    Vector sigma(mu.size());
    for (Eigen::Index r = 0; r < mu.size(); ++r) {
        sigma(r) = std::sqrt((member_pred.row(r).array() - mu(r)).square().sum() /
                             static_cast<double>(member_pred.cols()));
    }

    // Two-sided normal quantiles for the nominal levels.
    const std::vector<std::pair<double, double>> levels = {
        {0.50, 0.6744897501960817},
        {0.80, 1.2815515655446004},
        {0.90, 1.6448536269514722},
        {0.95, 1.959963984540054},
    };

    CalibrationReport report;
    report.n = static_cast<std::size_t>(y.size());
    for (const auto& [nominal, z] : levels) {
        Eigen::Index inside = 0;
        for (Eigen::Index r = 0; r < y.size(); ++r) {
            if (std::abs(y(r) - mu(r)) <= z * sigma(r)) ++inside;
        }
        report.levels.push_back(
            {nominal, z, static_cast<double>(inside) / static_cast<double>(y.size())});
    }
    return report;
}

std::vector<FeaturePerturbation> default_perturbations() {
    return {{Feature::Temperature, 1.0},
            {Feature::PressureCathode, 1.0},
            {Feature::CurrentDensity, 0.1},
            {Feature::Thickness, 1.0}};
}

namespace {

OperatingPoint shifted(const OperatingPoint& pt, Feature f, double delta) {
    OperatingPoint out = pt;
    switch (f) {
    case Feature::Temperature: out.temperature_stack += delta; break;
    case Feature::PressureCathode: out.pressure_cathode += delta; break;
    case Feature::PressureAnode: out.pressure_anode += delta; break;
    case Feature::Thickness: out.thickness += delta; break;
    case Feature::CurrentDensity: out.current_density += delta; break;
    case Feature::Compression: out.compression += delta; break;
    default:
        throw std::invalid_argument("sensitivity: feature is not continuously perturbable");
    }
    return out;
}

} // namespace

std::vector<SensitivityResult> sensitivity(const EnsembleModel& e,
                                           const std::vector<OperatingPoint>& base_points,
                                           const std::vector<FeaturePerturbation>& probes) {
    if (e.members.empty()) {
        throw std::runtime_error("sensitivity: empty ensemble");
    }
    const int classes = static_cast<int>(e.membrane_classes.size());
    std::vector<SensitivityResult> results;
    for (const auto& probe : probes) {
        SensitivityResult res;
        res.feature = probe.feature;
        res.delta = probe.delta;
        std::vector<double> values;
        for (const auto& pt : base_points) {
            const OperatingPoint hi = shifted(pt, probe.feature, probe.delta);
            const OperatingPoint lo = shifted(pt, probe.feature, -probe.delta);
            if (!hi.valid() || !lo.valid()) {
                ++res.n_skipped;
                continue;
            }
            const Vector8 x_hi =
                normalize_features(encode_features(hi, classes), e.normalization);
            const Vector8 x_lo =
                normalize_features(encode_features(lo, classes), e.normalization);
            values.push_back(std::abs(ensemble_mean(e, x_hi) - ensemble_mean(e, x_lo)) /
                             (2.0 * probe.delta));
        }
        res.n_used = values.size();
        if (!values.empty()) {
            double sum = 0.0;
            for (double v : values) sum += v;
            res.mean = sum / static_cast<double>(values.size());
            double sq = 0.0;
            for (double v : values) sq += (v - res.mean) * (v - res.mean);
            res.stddev = std::sqrt(sq / static_cast<double>(values.size()));
        }
        results.push_back(res);
    }
    return results;
}

void save_ensemble(const EnsembleModel& e, const std::string& directory) {
    fs::create_directories(directory);
    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["physics_weight"] = e.physics_weight;
    manifest["member_seeds"] = e.member_seeds;
    manifest["excluded_seeds"] = e.excluded_seeds;
    manifest["membrane_classes"] = e.membrane_classes;

    std::vector<std::string> files;
    for (std::size_t k = 0; k < e.members.size(); ++k) {
        std::ostringstream name;
        name << "member_" << e.member_seeds[k] << ".json";
        Checkpoint ckpt;
        ckpt.model = e.members[k];
        ckpt.normalization = e.normalization;
        ckpt.membrane_classes = e.membrane_classes;
        ckpt.metadata["seed"] = static_cast<double>(e.member_seeds[k]);
        ckpt.metadata["physics_weight"] = e.physics_weight;
        save_checkpoint(ckpt, (fs::path(directory) / name.str()).string());
        files.push_back(name.str());
    }
    manifest["members"] = files;

    std::ofstream out(fs::path(directory) / "manifest.json");
    if (!out) {
        throw std::runtime_error("save_ensemble: cannot write manifest in " + directory);
    }
    out << manifest.dump(2) << "\n";
}

EnsembleModel load_ensemble(const std::string& directory) {
    std::ifstream in(fs::path(directory) / "manifest.json");
    if (!in) {
        throw std::runtime_error("load_ensemble: no manifest.json in " + directory);
    }
    nlohmann::json manifest;
    in >> manifest;

    EnsembleModel e;
    e.physics_weight = manifest.at("physics_weight").get<double>();
    e.member_seeds = manifest.at("member_seeds").get<std::vector<std::uint64_t>>();
    e.excluded_seeds = manifest.at("excluded_seeds").get<std::vector<std::uint64_t>>();
    e.membrane_classes = manifest.at("membrane_classes").get<std::vector<std::string>>();

    const auto files = manifest.at("members").get<std::vector<std::string>>();
    if (files.size() != e.member_seeds.size()) {
        throw std::runtime_error("load_ensemble: manifest member/seed count mismatch");
    }
    bool have_stats = false;
    for (const auto& name : files) {
        Checkpoint ckpt = load_checkpoint((fs::path(directory) / name).string());
        if (!have_stats && ckpt.normalization) {
            e.normalization = *ckpt.normalization;
            have_stats = true;
        }
        e.members.push_back(std::move(ckpt.model));
    }
    if (!have_stats) {
        throw std::runtime_error("load_ensemble: member checkpoints carry no stats");
    }
    return e;
}

} // namespace h2x
