#include "h2x/report_io.hpp"

#include "h2x/util.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace h2x {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    return out;
}

json metrics_to_json(const Metrics& m) {
    return {{"r2", m.r2 ? json(*m.r2) : json()},
            {"rmse", m.rmse},
            {"mae", m.mae},
            {"mape", m.mape},
            {"mape_skipped", m.mape_skipped}};
}

std::string feature_name(Feature f) {
    switch (f) {
    case Feature::Temperature: return "temperature_c";
    case Feature::PressureCathode: return "pressure_cathode_bar";
    case Feature::PressureAnode: return "pressure_anode_bar";
    case Feature::Thickness: return "thickness_um";
    case Feature::CurrentDensity: return "current_density_a_cm2";
    case Feature::MembraneCode: return "membrane_code";
    case Feature::Compression: return "compression_um";
    case Feature::PtInterlayer: return "pt_interlayer";
    }
    return "unknown";
}

} // namespace

void write_train_report(const TrainReport& report, const std::string& path) {
    json j;
    j["stop_epoch"] = report.stop_epoch;
    j["best_epoch"] = report.best_epoch;
    j["best_val_loss"] = report.best_val_loss;
    j["config"] = {
        {"physics_weight", report.config.physics_weight},
        {"lr", report.config.lr},
        {"batch_size", report.config.batch_size},
        {"max_epochs", report.config.max_epochs},
        {"base_seed", report.config.base_seed},
        {"plateau",
         {{"factor", report.config.plateau.factor},
          {"patience", report.config.plateau.patience},
          {"lr_min", report.config.plateau.lr_min}}},
        {"early_stop",
         {{"patience", report.config.early_stop.patience},
          {"min_delta", report.config.early_stop.min_delta}}},
    };
    if (report.test_metrics) {
        j["test_metrics"] = metrics_to_json(*report.test_metrics);
    }
    json train_loss = json::array();
    json val_loss = json::array();
    json lr = json::array();
    for (const auto& e : report.epochs) {
        train_loss.push_back(e.train_loss);
        val_loss.push_back(e.val_loss);
        lr.push_back(e.lr);
    }
    j["train_loss"] = std::move(train_loss);
    j["val_loss"] = std::move(val_loss);
    j["lr"] = std::move(lr);

    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_cv_csv(const CvReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "rep,fold,seed,beta,r2,rmse,mae,mape,stop_epoch\n";
    for (const auto& row : report.rows) {
        out << row.rep << ',' << row.fold << ',' << row.seed << ','
            << format_double(row.beta) << ','
            << (row.metrics.r2 ? format_double(*row.metrics.r2) : std::string()) << ','
            << format_double(row.metrics.rmse) << ',' << format_double(row.metrics.mae)
            << ',' << format_double(row.metrics.mape) << ',' << row.stop_epoch << "\n";
    }
}

void write_predictions_csv(const std::vector<PredictionRow>& rows,
                           const std::vector<std::string>& membrane_classes,
                           const std::string& path) {
    auto out = open_out(path);
    const bool with_uncertainty = !rows.empty() && rows.front().uncertainty.has_value();
    const bool with_fusion = !rows.empty() && rows.front().y_fused.has_value();
    out << "membrane,temperature_c,pressure_cathode_bar,pressure_anode_bar,"
           "thickness_um,current_density_a_cm2,compression_um,pt_interlayer,"
           "prediction_pct";
    if (with_uncertainty) out << ",mu,sigma,ci95_lo,ci95_hi";
    if (with_fusion) out << ",y_network,y_physics,y_fused";
    out << "\n";
    for (const auto& row : rows) {
        const auto& pt = row.point;
        const std::string membrane =
            pt.membrane_id >= 0 &&
                    pt.membrane_id < static_cast<int>(membrane_classes.size())
                ? membrane_classes[pt.membrane_id]
                : "unknown";
        out << membrane << ',' << format_double(pt.temperature_stack) << ','
            << format_double(pt.pressure_cathode) << ','
            << format_double(pt.pressure_anode) << ',' << format_double(pt.thickness)
            << ',' << format_double(pt.current_density) << ','
            << format_double(pt.compression) << ',' << pt.pt_interlayer << ','
            << format_double(row.y_final);
        if (with_uncertainty) {
            out << ',' << format_double(row.uncertainty->mean) << ','
                << format_double(row.uncertainty->stddev) << ','
                << format_double(row.uncertainty->ci95.first) << ','
                << format_double(row.uncertainty->ci95.second);
        }
        if (with_fusion) {
            out << ',' << format_double(row.y_network) << ','
                << format_double(row.y_physics.value_or(0.0)) << ','
                << format_double(row.y_fused.value_or(0.0));
        }
        out << "\n";
    }
}

void write_extrapolation_csv(const ExtrapolationReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "pressure_bar,method,n_points,r2,rmse,mae,mape\n";
    for (const auto& row : report.rows) {
        out << format_double(row.pressure) << ',' << row.method << ',' << row.n_points
            << ','
            << (row.metrics.r2 ? format_double(*row.metrics.r2) : std::string()) << ','
            << format_double(row.metrics.rmse) << ',' << format_double(row.metrics.mae)
            << ',' << format_double(row.metrics.mape) << "\n";
    }
}

void write_bench_json(const BenchReport& report, const std::string& path) {
    json j;
    j["mode"] = to_string(report.mode);
    j["n_total"] = report.n_total;
    j["n_warmup"] = report.n_warmup;
    j["retained"] = report.retained;
    j["float32"] = report.float32;
    j["mean_us"] = report.mean_us;
    j["std_us"] = report.std_us;
    j["p50_us"] = report.p50_us;
    j["p95_us"] = report.p95_us;
    j["p99_us"] = report.p99_us;
    j["total_us"] = report.total_us;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_calibration_json(const CalibrationReport& report, const std::string& path) {
    json levels = json::array();
    for (const auto& level : report.levels) {
        levels.push_back({{"nominal", level.nominal},
                          {"z", level.z},
                          {"coverage", level.coverage}});
    }
    json j;
    j["n"] = report.n;
    j["levels"] = std::move(levels);
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_sensitivity_csv(const std::vector<SensitivityResult>& results,
                           const std::string& path) {
    auto out = open_out(path);
    out << "feature,delta,mean,std,n_used,n_skipped\n";
    for (const auto& r : results) {
        out << feature_name(r.feature) << ',' << format_double(r.delta) << ','
            << format_double(r.mean) << ',' << format_double(r.stddev) << ',' << r.n_used
            << ',' << r.n_skipped << "\n";
    }
}

std::string render_run_report(const std::string& run_dir) {
    if (!fs::is_directory(run_dir)) {
        throw std::runtime_error("render_run_report: not a directory: " + run_dir);
    }
    std::ostringstream out;
    out << "run report: " << fs::path(run_dir).filename().string() << "\n";

    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());

    for (const auto& name : names) {
        const std::string path = (fs::path(run_dir) / name).string();
        if (name == "train_report.json") {
            std::ifstream in(path);
            json j;
            in >> j;
            out << "train: stop_epoch=" << j.value("stop_epoch", 0)
                << " best_epoch=" << j.value("best_epoch", 0)
                << " best_val_loss=" << format_double(j.value("best_val_loss", 0.0));
            if (j.contains("test_metrics")) {
                const auto& m = j.at("test_metrics");
                out << " test_r2=" << format_double(m.value("r2", 0.0))
                    << " test_rmse=" << format_double(m.value("rmse", 0.0));
            }
            out << "\n";
        } else if (name == "bench.json") {
            std::ifstream in(path);
            json j;
            in >> j;
            out << "bench: mode=" << j.value("mode", std::string())
                << " mean_us=" << format_double(j.value("mean_us", 0.0))
                << " p95_us=" << format_double(j.value("p95_us", 0.0)) << "\n";
        } else if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
            std::ifstream in(path);
            std::size_t lines = 0;
            std::string line;
            while (std::getline(in, line)) ++lines;
            out << name << ": " << (lines > 0 ? lines - 1 : 0) << " row(s)\n";
        } else if (name == "manifest.json") {
            std::ifstream in(path);
            json j;
            in >> j;
            out << "ensemble: members=" << j.value("members", json::array()).size()
                << " excluded=" << j.value("excluded_seeds", json::array()).size()
                << "\n";
        }
    }
    return out.str();
}

} // namespace h2x
