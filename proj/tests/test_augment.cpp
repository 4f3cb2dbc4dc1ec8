#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "h2x/augment.hpp"
#include "h2x/spline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

using namespace h2x;

namespace {

/// One concentration-current series with labels scaled off the oracle.
Dataset oracle_series(const std::vector<double>& currents, double label_scale = 1.0) {
    PhysicsParams p;
    Dataset ds;
    ds.membrane_classes = {"mem"};
    for (double i : currents) {
        OperatingPoint pt;
        pt.temperature_stack = 25.0;
        pt.pressure_cathode = 10.0;
        pt.pressure_anode = 1.0;
        pt.thickness = 200.0;
        pt.current_density = i;
        pt.membrane_id = 0;
        pt.h2_concentration =
            label_scale * crossover_concentration(pt, p).x_h2_cathodic;
        ds.records.push_back({"s1", pt, Provenance::Experimental});
    }
    return ds;
}

std::vector<const DataRecord*> augmented_records(const Dataset& ds) {
    std::vector<const DataRecord*> out;
    for (const auto& rec : ds.records) {
        if (rec.provenance == Provenance::Augmented) out.push_back(&rec);
    }
    return out;
}

} // namespace

TEST_CASE("spline interpolates its knots and falls back by point count") {
    const std::vector<double> x4 = {0.0, 1.0, 2.0, 3.0};
    const std::vector<double> y4 = {1.0, 2.0, 0.5, 1.5};
    const Spline1D cubic(x4, y4);
    CHECK(cubic.order() == 3);
    for (std::size_t k = 0; k < x4.size(); ++k) {
        CHECK(cubic(x4[k]) == doctest::Approx(y4[k]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(cubic(-0.1), std::domain_error);
    CHECK_THROWS_AS(cubic(3.1), std::domain_error);

    const Spline1D quad({0.0, 1.0, 2.0}, {0.0, 1.0, 4.0});
    CHECK(quad.order() == 2);
    CHECK(quad(1.5) == doctest::Approx(2.25).epsilon(1e-12));

    const Spline1D lin({0.0, 2.0}, {1.0, 3.0});
    CHECK(lin.order() == 1);
    CHECK(lin(1.0) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(Spline1D({0.0, 0.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("oracle-labeled series augments densely within the gaps") {
    std::vector<double> currents;
    for (int k = 0; k < 10; ++k) currents.push_back(0.4 + 0.2 * k);
    const Dataset ds = oracle_series(currents);
    AugmentConfig cfg;
    AugmentStats stats;
    PhysicsParams p;
    const Dataset out = augment(ds, cfg, p, &stats);

    CHECK(stats.series == 1);
    CHECK(out.size() > ds.size());
    const auto added = augmented_records(out);
    CHECK(added.size() == stats.emitted);
    // Nine gaps, at most 10 interpolants each.
    CHECK(added.size() <= 90);
    CHECK(added.size() >= 30);
    CHECK(stats.emitted + stats.rejected_bounds + stats.rejected_monotone +
              stats.rejected_physics ==
          stats.candidates);

    for (const auto* rec : added) {
        const double i = rec->point.current_density;
        CHECK(i > 0.4);
        CHECK(i < 2.2);  // never extrapolates
        CHECK(*rec->point.h2_concentration >= 0.0);
        CHECK(*rec->point.h2_concentration <= 20.0);
        // Within 5% of the oracle prediction.
        const double x =
            crossover_concentration(rec->point, p).x_h2_cathodic;
        CHECK(std::abs(*rec->point.h2_concentration - x) <= 0.05 * std::abs(x) + 1e-12);
    }
}

TEST_CASE("two-point monotone series interpolates within the endpoint bracket") {
    Dataset ds;
    ds.membrane_classes = {"mem"};
    for (double i : {0.5, 1.0}) {
        OperatingPoint pt;
        pt.temperature_stack = 25.0;
        pt.pressure_cathode = 10.0;
        pt.current_density = i;
        pt.membrane_id = 0;
        pt.h2_concentration = i == 0.5 ? 1.0 : 2.0;
        ds.records.push_back({"s", pt, Provenance::Experimental});
    }
    AugmentConfig cfg;
    cfg.physics_tolerance = 1e9;  // isolate the interpolation constraints
    AugmentStats stats;
    const Dataset out = augment(ds, cfg, PhysicsParams{}, &stats);

    const auto added = augmented_records(out);
    CHECK(added.size() == 10);
    double prev = 1.0;
    std::vector<const DataRecord*> sorted(added.begin(), added.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        return a->point.current_density < b->point.current_density;
    });
    for (const auto* rec : sorted) {
        const double y = *rec->point.h2_concentration;
        CHECK(y >= 1.0);
        CHECK(y <= 2.0);
        CHECK(y >= prev);  // non-decreasing in i
        prev = y;
    }
}

TEST_CASE("interpolants beyond the physics tolerance are rejected") {
    // Labels 8% above the oracle: a 5% tolerance rejects every candidate on
    // this nearly-linear gap, a 10% tolerance accepts them.
    const Dataset ds = oracle_series({0.95, 1.0}, 1.08);
    PhysicsParams p;

    AugmentConfig strict;
    strict.physics_tolerance = 0.05;
    AugmentStats stats;
    const Dataset rejected = augment(ds, strict, p, &stats);
    CHECK(augmented_records(rejected).empty());
    CHECK(stats.rejected_physics == 10);

    AugmentConfig loose;
    loose.physics_tolerance = 0.10;
    const Dataset accepted = augment(ds, loose, p);
    CHECK(augmented_records(accepted).size() == 10);
}

TEST_CASE("interpolants outside the label bounds are rejected") {
    const Dataset ds = oracle_series({0.5, 0.8, 1.2, 1.6});
    AugmentConfig cfg;
    cfg.bounds_hi = 0.02;  // below this series' oracle values (~0.03-0.07)
    cfg.physics_tolerance = 1e9;
    AugmentStats stats;
    const Dataset out = augment(ds, cfg, PhysicsParams{}, &stats);
    CHECK(augmented_records(out).empty());
    CHECK(stats.rejected_bounds == stats.candidates);
}

TEST_CASE("monotone filter drops spline overshoot when endpoints are monotone") {
    // A flat-then-jump shape makes the natural cubic overshoot above the
    // upper endpoint inside the rising gap.
    Dataset ds;
    ds.membrane_classes = {"mem"};
    const std::vector<double> is = {0.2, 0.6, 1.0, 1.4};
    const std::vector<double> ys = {1.0, 1.0, 4.0, 4.0};
    for (std::size_t k = 0; k < is.size(); ++k) {
        OperatingPoint pt;
        pt.current_density = is[k];
        pt.membrane_id = 0;
        pt.h2_concentration = ys[k];
        ds.records.push_back({"s", pt, Provenance::Experimental});
    }
    AugmentConfig cfg;
    cfg.physics_tolerance = 1e9;
    AugmentStats with_filter;
    augment(ds, cfg, PhysicsParams{}, &with_filter);
    CHECK(with_filter.rejected_monotone > 0);

    cfg.enforce_monotone = false;
    AugmentStats no_filter;
    const Dataset out = augment(ds, cfg, PhysicsParams{}, &no_filter);
    CHECK(no_filter.rejected_monotone == 0);
    CHECK(no_filter.emitted > with_filter.emitted);

    // With the filter on, every kept gap sequence is monotone between its
    // endpoints.
    cfg.enforce_monotone = true;
    const Dataset filtered = augment(ds, cfg, PhysicsParams{}, nullptr);
    std::map<double, double> by_i;
    for (const auto& rec : filtered.records) {
        by_i[rec.point.current_density] = *rec.point.h2_concentration;
    }
    double prev = -1e300;
    for (const auto& [i, y] : by_i) {
        CHECK(y >= prev - 1e-12);
        prev = y;
    }
}

TEST_CASE("series shorter than two points and zero budget are no-ops") {
    const Dataset single = oracle_series({1.0});
    AugmentStats stats;
    const Dataset out = augment(single, AugmentConfig{}, PhysicsParams{}, &stats);
    CHECK(out.size() == 1);
    CHECK(stats.series == 0);

    const Dataset pair = oracle_series({0.5, 1.0});
    AugmentConfig zero;
    zero.max_points_per_gap = 0;
    const Dataset none = augment(pair, zero, PhysicsParams{}, nullptr);
    CHECK(none.size() == 2);
}

TEST_CASE("augment requires labels") {
    Dataset ds;
    ds.membrane_classes = {"mem"};
    OperatingPoint pt;
    pt.membrane_id = 0;
    ds.records.push_back({"s", pt, Provenance::Experimental});
    CHECK_THROWS_AS(augment(ds, AugmentConfig{}, PhysicsParams{}, nullptr),
                    std::runtime_error);
}
