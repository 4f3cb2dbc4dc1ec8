#include "h2x/augment.hpp"

#include "h2x/spline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace h2x {

void AugmentConfig::validate() const {
    if (max_points_per_gap < 0) {
        throw std::domain_error("AugmentConfig: max_points_per_gap must be >= 0");
    }
    if (!(physics_tolerance > 0.0)) {
        throw std::domain_error("AugmentConfig: physics_tolerance must be positive");
    }
    if (!(bounds_hi > bounds_lo)) {
        throw std::domain_error("AugmentConfig: empty label bounds");
    }
}

namespace {

using SeriesKey =
    std::tuple<std::string, int, double, double, double, double, double, int>;

SeriesKey series_key(const DataRecord& rec) {
    const auto& pt = rec.point;
    return {rec.study,       pt.membrane_id, pt.temperature_stack,
            pt.pressure_cathode, pt.pressure_anode, pt.thickness,
            pt.compression,  pt.pt_interlayer};
}

} // namespace

Dataset augment(const Dataset& ds, const AugmentConfig& cfg, const PhysicsParams& physics,
                AugmentStats* stats) {
    cfg.validate();
    AugmentStats local;

    std::map<SeriesKey, std::vector<std::size_t>> series;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        if (!ds.records[r].point.h2_concentration) {
            throw std::runtime_error("augment: unlabeled record " + std::to_string(r));
        }
        series[series_key(ds.records[r])].push_back(r);
    }

    Dataset out = ds;
    for (const auto& [key, members] : series) {
        if (members.size() < 2 || cfg.max_points_per_gap == 0) continue;

        // Sort by current density; exact duplicates collapse to their mean label.
        std::vector<std::pair<double, double>> pts;
        for (std::size_t idx : members) {
            const auto& pt = ds.records[idx].point;
            pts.emplace_back(pt.current_density, *pt.h2_concentration);
        }
        std::sort(pts.begin(), pts.end());
        std::vector<double> xs, ys;
        for (std::size_t k = 0; k < pts.size();) {
            std::size_t j = k;
            double sum = 0.0;
            while (j < pts.size() && pts[j].first == pts[k].first) {
                sum += pts[j].second;
                ++j;
            }
            xs.push_back(pts[k].first);
            ys.push_back(sum / static_cast<double>(j - k));
            k = j;
        }
        if (xs.size() < 2) continue;
        ++local.series;

        const Spline1D spline(xs, ys);
        const DataRecord prototype = ds.records[members.front()];

        for (std::size_t g = 0; g + 1 < xs.size(); ++g) {
            const double i_lo = xs[g];
            const double i_hi = xs[g + 1];
            const double y_lo = ys[g];
            const double y_hi = ys[g + 1];
            const int direction = y_hi > y_lo ? 1 : (y_hi < y_lo ? -1 : 0);
            double last_kept = y_lo;

            for (int j = 1; j <= cfg.max_points_per_gap; ++j) {
                const double t = static_cast<double>(j) /
                                 static_cast<double>(cfg.max_points_per_gap + 1);
                const double i_new = i_lo + t * (i_hi - i_lo);
                if (!(i_new > i_lo && i_new < i_hi)) continue;  // degenerate gap
                const double y_new = spline(i_new);
                ++local.candidates;

                if (!(y_new >= cfg.bounds_lo && y_new <= cfg.bounds_hi)) {
                    ++local.rejected_bounds;
                    continue;
                }
                if (cfg.enforce_monotone) {
                    bool ok;
                    if (direction > 0) {
                        ok = y_new >= last_kept && y_new <= y_hi;
                    } else if (direction < 0) {
                        ok = y_new <= last_kept && y_new >= y_hi;
                    } else {
                        // Equal endpoints admit only a flat interpolant.
                        ok = std::abs(y_new - y_lo) <=
                             1e-12 * std::max(1.0, std::abs(y_lo));
                    }
                    if (!ok) {
                        ++local.rejected_monotone;
                        continue;
                    }
                }

                OperatingPoint candidate = prototype.point;
                candidate.current_density = i_new;
                candidate.h2_concentration.reset();
                const double x_oracle =
                    crossover_concentration(candidate, physics).x_h2_cathodic;
                const double rel = std::abs(y_new - x_oracle) /
                                   std::max(std::abs(x_oracle), 1e-12);
                if (rel > cfg.physics_tolerance) {
                    ++local.rejected_physics;
                    continue;
                }

                candidate.h2_concentration = y_new;
                out.records.push_back({prototype.study, candidate, Provenance::Augmented});
                ++local.emitted;
                if (direction != 0) last_kept = y_new;
            }
        }
    }

    if (stats) *stats = local;
    return out;
}

} // namespace h2x
