#pragma once

#include "h2x/types.hpp"

#include <vector>

namespace h2x {

/// 1-D interpolant over strictly increasing knots: natural cubic spline for
/// four or more points, with quadratic / linear fallbacks for three / two.
/// Evaluation outside the knot range is refused (interpolation only).
class Spline1D {
public:
    Spline1D(const std::vector<double>& x, const std::vector<double>& y);

    double operator()(double x) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    int order() const { return order_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> second_derivative_;  // cubic case
    Eigen::Vector3d quad_coeffs_;            // quadratic case
    int order_ = 3;
};

} // namespace h2x
