#pragma once

#include <Eigen/Dense>

namespace h2x {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector8 = Eigen::Matrix<double, 8, 1>;
using Residuals11 = Eigen::Matrix<double, 11, 1>;

/// Unit conversions at the type boundary; all internal physics arithmetic
/// runs in the cm-mol-s-bar system.
constexpr double kCm2PerM2 = 1.0e4;
constexpr double kCmPerMicron = 1.0e-4;
constexpr double kKelvinOffset = 273.15;

/// Number of input features fed to the network:
/// (T, P_ca, P_an, thickness, i, membrane_code, compression, pt_interlayer).
constexpr int kFeatureCount = 8;

enum class Feature : int {
    Temperature = 0,
    PressureCathode = 1,
    PressureAnode = 2,
    Thickness = 3,
    CurrentDensity = 4,
    MembraneCode = 5,
    Compression = 6,
    PtInterlayer = 7,
};

} // namespace h2x
