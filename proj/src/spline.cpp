#include "h2x/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace h2x {

Spline1D::Spline1D(const std::vector<double>& x, const std::vector<double>& y)
    : x_(x), y_(y) {
    if (x_.size() != y_.size() || x_.size() < 2) {
        throw std::invalid_argument("Spline1D: need matching x/y with at least 2 points");
    }
    for (std::size_t k = 1; k < x_.size(); ++k) {
        if (!(x_[k] > x_[k - 1])) {
            throw std::invalid_argument("Spline1D: knots must be strictly increasing");
        }
    }

    const std::size_t n = x_.size();
    if (n == 2) {
        order_ = 1;
        return;
    }
    if (n == 3) {
        order_ = 2;
        // Quadratic through three points: solve the 3x3 Vandermonde system.
        Eigen::Matrix3d v;
        Eigen::Vector3d rhs;
        for (int k = 0; k < 3; ++k) {
            v(k, 0) = 1.0;
            v(k, 1) = x_[k];
            v(k, 2) = x_[k] * x_[k];
            rhs(k) = y_[k];
        }
        quad_coeffs_ = v.partialPivLu().solve(rhs);
        return;
    }

    // Natural cubic spline: tridiagonal solve for interior second derivatives.
    order_ = 3;
    const std::size_t m = n - 2;
    Vector diag(m), lower(m), upper(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double h0 = x_[k + 1] - x_[k];
        const double h1 = x_[k + 2] - x_[k + 1];
        lower(k) = h0;
        diag(k) = 2.0 * (h0 + h1);
        upper(k) = h1;
        rhs(k) = 6.0 * ((y_[k + 2] - y_[k + 1]) / h1 - (y_[k + 1] - y_[k]) / h0);
    }
    // Thomas algorithm.
    for (std::size_t k = 1; k < m; ++k) {
        const double w = lower(k) / diag(k - 1);
        diag(k) -= w * upper(k - 1);
        rhs(k) -= w * rhs(k - 1);
    }
    Vector sol(m);
    sol(m - 1) = rhs(m - 1) / diag(m - 1);
    for (std::size_t k = m - 1; k-- > 0;) {
        sol(k) = (rhs(k) - upper(k) * sol(k + 1)) / diag(k);
    }
    second_derivative_.assign(n, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        second_derivative_[k + 1] = sol(k);
    }
}

double Spline1D::operator()(double x) const {
    if (!(x >= x_.front() && x <= x_.back())) {
        throw std::domain_error("Spline1D: evaluation outside knot range");
    }
    if (order_ == 1) {
        const double t = (x - x_[0]) / (x_[1] - x_[0]);
        return y_[0] + t * (y_[1] - y_[0]);
    }
    if (order_ == 2) {
        return quad_coeffs_(0) + quad_coeffs_(1) * x + quad_coeffs_(2) * x * x;
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - x_.begin());
    hi = std::clamp<std::size_t>(hi, 1, x_.size() - 1);
    const std::size_t lo = hi - 1;
    const double h = x_[hi] - x_[lo];
    const double a = (x_[hi] - x) / h;
    const double b = (x - x_[lo]) / h;
    return a * y_[lo] + b * y_[hi] +
           ((a * a * a - a) * second_derivative_[lo] +
            (b * b * b - b) * second_derivative_[hi]) *
               (h * h) / 6.0;
}

} // namespace h2x
