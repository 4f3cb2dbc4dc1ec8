#include "h2x/dataset.hpp"

#include "h2x/rng.hpp"
#include "h2x/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace h2x {

const char* const kCsvHeader =
    "study,membrane,temperature_c,pressure_cathode_bar,pressure_anode_bar,"
    "thickness_um,current_density_a_cm2,compression_um,pt_interlayer,"
    "h2_concentration_pct,provenance";

std::string to_string(Provenance p) {
    return p == Provenance::Experimental ? "experimental" : "augmented";
}

int Dataset::class_index(const std::string& membrane) const {
    const auto it = std::find(membrane_classes.begin(), membrane_classes.end(), membrane);
    return it == membrane_classes.end()
               ? -1
               : static_cast<int>(it - membrane_classes.begin());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

Dataset load_csv(const std::string& path, bool require_labels) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_csv: cannot open " + path);
    }

    std::string header;
    if (!std::getline(in, header)) {
        throw std::runtime_error("load_csv: empty file " + path);
    }
    while (!header.empty() && (header.back() == '\r' || header.back() == '\n')) {
        header.pop_back();
    }
    if (header != kCsvHeader) {
        throw std::runtime_error("load_csv: header mismatch in " + path +
                                 "\n  expected: " + kCsvHeader + "\n  got:      " + header);
    }

    struct RawRow {
        int line;
        std::string study;
        std::string membrane;
        OperatingPoint point;
        Provenance provenance;
    };

    std::vector<RawRow> rows;
    std::vector<std::string> membranes;  // first-appearance order
    std::vector<std::string> errors;
    std::string line;
    int line_no = 1;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_line(line);
        if (fields.size() != 11) {
            errors.push_back("line " + std::to_string(line_no) + ": expected 11 columns, got " +
                             std::to_string(fields.size()));
            continue;
        }
        RawRow row;
        row.line = line_no;
        row.study = fields[0];
        row.membrane = fields[1];
        bool parse_ok = true;
        auto num = [&](int idx, const char* name) {
            double v = 0.0;
            if (!parse_double(fields[idx], v)) {
                errors.push_back("line " + std::to_string(line_no) + ": bad " +
                                 std::string(name) + " value '" + fields[idx] + "'");
                parse_ok = false;
            }
            return v;
        };
        row.point.temperature_stack = num(2, "temperature_c");
        row.point.pressure_cathode = num(3, "pressure_cathode_bar");
        row.point.pressure_anode = num(4, "pressure_anode_bar");
        row.point.thickness = num(5, "thickness_um");
        row.point.current_density = num(6, "current_density_a_cm2");
        row.point.compression = num(7, "compression_um");
        row.point.pt_interlayer = static_cast<int>(num(8, "pt_interlayer"));
        if (fields[9].empty()) {
            if (require_labels) {
                errors.push_back("line " + std::to_string(line_no) +
                                 ": missing h2_concentration_pct");
                parse_ok = false;
            }
        } else {
            row.point.h2_concentration = num(9, "h2_concentration_pct");
        }
        if (fields[10] == "experimental" || fields[10].empty()) {
            row.provenance = Provenance::Experimental;
        } else if (fields[10] == "augmented") {
            row.provenance = Provenance::Augmented;
        } else {
            errors.push_back("line " + std::to_string(line_no) + ": unknown provenance '" +
                             fields[10] + "'");
            parse_ok = false;
        }
        if (!parse_ok) continue;

        if (std::find(membranes.begin(), membranes.end(), row.membrane) == membranes.end()) {
            membranes.push_back(row.membrane);
        }
        rows.push_back(std::move(row));
    }

    // Stable class registry: sorted names, so the encoding does not depend
    // on row order.
    std::sort(membranes.begin(), membranes.end());

    Dataset ds;
    ds.membrane_classes = membranes;
    for (auto& row : rows) {
        row.point.membrane_id = ds.class_index(row.membrane);
        const auto bad = row.point.violations();
        for (const auto& b : bad) {
            errors.push_back("line " + std::to_string(row.line) + ": " + b);
        }
        if (bad.empty()) {
            ds.records.push_back({row.study, row.point, row.provenance});
        }
    }

    if (!errors.empty()) {
        std::ostringstream msg;
        msg << "load_csv: " << errors.size() << " invalid row(s) in " << path << ":";
        for (const auto& e : errors) msg << "\n  " << e;
        throw std::runtime_error(msg.str());
    }
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_csv: cannot open " + path + " for writing");
    }
    out << kCsvHeader << "\n";
    for (const auto& rec : ds.records) {
        const auto& pt = rec.point;
        out << rec.study << ',';
        out << (pt.membrane_id >= 0 &&
                        pt.membrane_id < static_cast<int>(ds.membrane_classes.size())
                    ? ds.membrane_classes[pt.membrane_id]
                    : std::string("unknown"))
            << ',';
        out << format_double(pt.temperature_stack) << ',';
        out << format_double(pt.pressure_cathode) << ',';
        out << format_double(pt.pressure_anode) << ',';
        out << format_double(pt.thickness) << ',';
        out << format_double(pt.current_density) << ',';
        out << format_double(pt.compression) << ',';
        out << pt.pt_interlayer << ',';
        if (pt.h2_concentration) out << format_double(*pt.h2_concentration);
        out << ',' << to_string(rec.provenance) << "\n";
    }
}

Vector8 encode_features(const OperatingPoint& pt, int class_count) {
    if (pt.membrane_id < 0 || pt.membrane_id >= class_count) {
        throw std::runtime_error("encode_features: membrane class " +
                                 std::to_string(pt.membrane_id) + " outside registry of " +
                                 std::to_string(class_count));
    }
    Vector8 x;
    x(0) = pt.temperature_stack;
    x(1) = pt.pressure_cathode;
    x(2) = pt.pressure_anode;
    x(3) = pt.thickness;
    x(4) = pt.current_density;
    x(5) = class_count > 1 ? static_cast<double>(pt.membrane_id) / (class_count - 1) : 0.0;
    x(6) = pt.compression;
    x(7) = static_cast<double>(pt.pt_interlayer);
    return x;
}

Matrix encode_dataset(const Dataset& ds) {
    Matrix out(ds.size(), kFeatureCount);
    const int classes = static_cast<int>(ds.membrane_classes.size());
    for (std::size_t r = 0; r < ds.size(); ++r) {
        out.row(r) = encode_features(ds.records[r].point, classes).transpose();
    }
    return out;
}

Vector labels(const Dataset& ds) {
    Vector y(ds.size());
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const auto& label = ds.records[r].point.h2_concentration;
        if (!label) {
            throw std::runtime_error("labels: record " + std::to_string(r) +
                                     " has no h2_concentration");
        }
        y(r) = *label;
    }
    return y;
}

NormStats compute_norm_stats(const Matrix& features) {
    if (features.rows() == 0) {
        throw std::runtime_error("compute_norm_stats: empty feature matrix");
    }
    NormStats stats;
    stats.feature_min = features.colwise().minCoeff().transpose();
    stats.feature_max = features.colwise().maxCoeff().transpose();
    for (int f = 0; f < kFeatureCount; ++f) {
        stats.degenerate[f] = !(stats.feature_max(f) > stats.feature_min(f));
    }
    return stats;
}

Matrix normalize_features(const Matrix& features, const NormStats& stats) {
    Matrix out = features;
    for (int f = 0; f < kFeatureCount; ++f) {
        if (stats.degenerate[f]) {
            out.col(f).setZero();
        } else {
            const double span = stats.feature_max(f) - stats.feature_min(f);
            out.col(f) = (features.col(f).array() - stats.feature_min(f)) / span;
        }
    }
    return out;
}

Vector8 normalize_features(const Vector8& features, const NormStats& stats) {
    Vector8 out;
    for (int f = 0; f < kFeatureCount; ++f) {
        if (stats.degenerate[f]) {
            out(f) = 0.0;
        } else {
            out(f) = (features(f) - stats.feature_min(f)) /
                     (stats.feature_max(f) - stats.feature_min(f));
        }
    }
    return out;
}

Matrix denormalize_features(const Matrix& scaled, const NormStats& stats) {
    Matrix out = scaled;
    for (int f = 0; f < kFeatureCount; ++f) {
        if (stats.degenerate[f]) {
            out.col(f).setConstant(stats.feature_min(f));
        } else {
            out.col(f) = scaled.col(f).array() *
                             (stats.feature_max(f) - stats.feature_min(f)) +
                         stats.feature_min(f);
        }
    }
    return out;
}

void SplitSpec::validate() const {
    if (!(train_frac > 0.0 && val_frac >= 0.0 && test_frac >= 0.0)) {
        throw std::domain_error("SplitSpec: fractions must be non-negative, train > 0");
    }
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
        throw std::domain_error("SplitSpec: fractions must sum to 1");
    }
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.membrane_classes = ds.membrane_classes;
    out.normalization_stats = ds.normalization_stats;
    out.records.reserve(indices.size());
    for (std::size_t idx : indices) {
        out.records.push_back(ds.records.at(idx));
    }
    return out;
}

namespace {

std::map<int, std::vector<std::size_t>> indices_by_class(const Dataset& ds) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        by_class[ds.records[r].point.membrane_id].push_back(r);
    }
    return by_class;
}

} // namespace

SplitResult stratified_split(const Dataset& ds, const SplitSpec& spec) {
    spec.validate();
    if (ds.empty()) {
        throw std::runtime_error("stratified_split: empty dataset");
    }

    SplitResult result;
    auto by_class = indices_by_class(ds);
    Rng rng(spec.seed);

    std::vector<std::size_t> train_idx, val_idx, test_idx;
    std::size_t eligible = 0;
    for (auto& [cls, idx] : by_class) {
        if (idx.size() < 3) {
            result.warnings.push_back("class " + std::to_string(cls) + " has " +
                                      std::to_string(idx.size()) +
                                      " record(s); placed entirely in train");
        } else {
            eligible += idx.size();
        }
    }

    const double fracs[3] = {spec.train_frac, spec.val_frac, spec.test_frac};
    long target[3];
    target[0] = std::lround(fracs[0] * static_cast<double>(eligible));
    target[1] = std::lround(fracs[1] * static_cast<double>(eligible));
    target[2] = static_cast<long>(eligible) - target[0] - target[1];

    // Pass 1: floor allocation per class, remainders recorded.
    struct ClassAlloc {
        int cls;
        std::vector<std::size_t> shuffled;
        long count[3];
        double remainder[3];
        int leftover;
    };
    std::vector<ClassAlloc> allocs;
    long assigned[3] = {0, 0, 0};
    for (auto& [cls, idx] : by_class) {
        auto shuffled = idx;
        rng.shuffle(shuffled);
        if (idx.size() < 3) {
            train_idx.insert(train_idx.end(), shuffled.begin(), shuffled.end());
            continue;
        }
        ClassAlloc a;
        a.cls = cls;
        a.shuffled = std::move(shuffled);
        long total = 0;
        for (int p = 0; p < 3; ++p) {
            const double exact = fracs[p] * static_cast<double>(idx.size());
            a.count[p] = static_cast<long>(std::floor(exact));
            a.remainder[p] = exact - static_cast<double>(a.count[p]);
            total += a.count[p];
        }
        a.leftover = static_cast<int>(static_cast<long>(idx.size()) - total);
        for (int p = 0; p < 3; ++p) assigned[p] += a.count[p];
        allocs.push_back(std::move(a));
    }

    // Pass 2: hand each class its leftover records, preferring the partition
    // with the largest in-class remainder among those still short globally.
    // Keeps per-class counts within one record of the exact fractions while
    // the global partition sizes land exactly on target.
    long deficit[3];
    for (int p = 0; p < 3; ++p) deficit[p] = target[p] - assigned[p];
    for (auto& a : allocs) {
        for (int n = 0; n < a.leftover; ++n) {
            int order[3] = {0, 1, 2};
            std::sort(order, order + 3, [&a](int lhs, int rhs) {
                if (a.remainder[lhs] != a.remainder[rhs]) {
                    return a.remainder[lhs] > a.remainder[rhs];
                }
                return lhs < rhs;
            });
            int chosen = -1;
            for (int p : order) {
                if (deficit[p] > 0) {
                    chosen = p;
                    break;
                }
            }
            if (chosen < 0) chosen = order[0];
            a.count[chosen] += 1;
            a.remainder[chosen] = 0.0;
            deficit[chosen] -= 1;
        }
    }

    for (const auto& a : allocs) {
        std::size_t pos = 0;
        for (long n = 0; n < a.count[0]; ++n) train_idx.push_back(a.shuffled[pos++]);
        for (long n = 0; n < a.count[1]; ++n) val_idx.push_back(a.shuffled[pos++]);
        for (long n = 0; n < a.count[2]; ++n) test_idx.push_back(a.shuffled[pos++]);
    }

    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    result.train = subset(ds, train_idx);
    result.val = subset(ds, val_idx);
    result.test = subset(ds, test_idx);
    return result;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& ds, int folds,
                                                       std::uint64_t seed) {
    if (folds < 2) {
        throw std::domain_error("stratified_kfold: need at least 2 folds");
    }
    if (ds.size() < static_cast<std::size_t>(folds)) {
        throw std::runtime_error("stratified_kfold: fewer records than folds");
    }
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> fold_indices(folds);
    // Deal each class round-robin; rotate the starting fold per class so the
    // odd remainders do not all land in fold 0.
    int start = 0;
    for (auto& [cls, idx] : indices_by_class(ds)) {
        auto shuffled = idx;
        rng.shuffle(shuffled);
        for (std::size_t n = 0; n < shuffled.size(); ++n) {
            fold_indices[(start + n) % folds].push_back(shuffled[n]);
        }
        start = (start + static_cast<int>(shuffled.size())) % folds;
    }
    for (auto& f : fold_indices) std::sort(f.begin(), f.end());
    return fold_indices;
}

} // namespace h2x
