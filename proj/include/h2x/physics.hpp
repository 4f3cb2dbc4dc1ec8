#pragma once

#include "h2x/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace h2x {

/// How the membrane water activity is obtained for the Springer chain.
/// FixedActivity pins a = 1 (fully humidified membrane); Antoine estimates
/// a from saturation-pressure ratios when no vapor data is available.
enum class SatPressureModel { FixedActivity, Antoine };

SatPressureModel sat_pressure_model_from_string(const std::string& name);
std::string to_string(SatPressureModel model);

/// Fixed transport constants of the mechanistic crossover model.
/// base_diffusivity is stored in m^2/s and converted to cm^2/s at the point
/// of use; everything else is already in the cm-mol-s-bar system.
struct PhysicsParams {
    double faraday_const = 96485.0;      ///< F, C/mol
    double porosity = 0.28;              ///< eps_m^w
    double tortuosity = 1.5;             ///< tau_m
    double darcy_coeff = 1.0e-5;         ///< K_D, bar^2 per (A/cm^2)
    double ref_temp = 298.0;             ///< T_ref, K
    double base_diffusivity = 1.0e-9;    ///< D0, m^2/s
    double temp_coeff = 0.01;            ///< alpha_T, 1/K
    double solubility_cathode = 1.0e-6;  ///< S_H2^ca, mol/(cm^3 bar)
    double solubility_anode = 1.0e-6;    ///< S_H2^an, mol/(cm^3 bar)
    double fixed_activity = 1.0;         ///< a when sat_pressure_model == FixedActivity
    SatPressureModel sat_pressure_model = SatPressureModel::FixedActivity;

    /// Throws std::domain_error if any constant is not strictly positive.
    void validate() const;
};

/// One physical operating record. The label is optional so the same type
/// serves training rows and prediction inputs.
struct OperatingPoint {
    double temperature_stack = 25.0;  ///< degC
    double pressure_cathode = 1.0;    ///< bar
    double pressure_anode = 1.0;      ///< bar
    double thickness = 200.0;         ///< um
    double current_density = 1.0;     ///< A/cm^2
    int membrane_id = 0;              ///< categorical class index
    double compression = 0.0;         ///< um
    int pt_interlayer = 0;            ///< {0,1}
    std::optional<double> h2_concentration;  ///< %, in [0,20] when present

    /// Returns human-readable invariant violations (empty when valid).
    std::vector<std::string> violations() const;
    bool valid() const { return violations().empty(); }
};

/// Every intermediate of the crossover chain, recorded so the loss module
/// and validators can reuse them without recomputation.
struct TransportState {
    double m_h2 = 0.0;        ///< Faradaic H2 production, mol/(s cm^2)
    double m_o2 = 0.0;        ///< Faradaic O2 production, mol/(s cm^2)
    double p_ca_eff = 0.0;    ///< effective cathode pressure, bar
    double c_sat_ca = 0.0;    ///< dissolved H2 at cathode interface, mol/cm^3
    double c_sat_an = 0.0;    ///< dissolved H2 at anode interface, mol/cm^3
    double t_m = 0.0;         ///< membrane temperature, degC
    double activity = 0.0;    ///< water activity a
    double water_content = 0.0;  ///< lambda_m
    double d_h2_water = 0.0;  ///< H2 diffusivity in membrane water, cm^2/s
    double d_eff = 0.0;       ///< effective diffusivity, cm^2/s
    double m_h2_crossover = 0.0;  ///< diffusive H2 crossover flux, mol/(s cm^2)
    double t_dif = 0.0;       ///< diffusion path (thickness - compression), cm
    double x_h2_cathodic = 0.0;   ///< H2 concentration in the O2 stream, %
};

struct FaradayRates {
    double h2;  ///< mol/(s cm^2)
    double o2;  ///< mol/(s cm^2)
};

struct Diffusivities {
    double h2_water;  ///< D_H2,w in cm^2/s
    double effective; ///< D_eff in cm^2/s
};

/// Faradaic production rates i/(2F) and i/(4F). Throws std::domain_error
/// for negative current density.
FaradayRates faraday_rates(double current_density, const PhysicsParams& p);

/// sqrt(P_ca^2 + K_D * i): convection-corrected cathode pressure.
double effective_cathode_pressure(double pressure_cathode, double current_density,
                                  const PhysicsParams& p);

/// Ohmic-heating membrane temperature T_stack + 0.5 i + 0.1 i^2, degC in/out.
double membrane_temperature(double temperature_stack, double current_density);

/// Water saturation pressure over liquid water (Antoine correlation), bar.
double water_saturation_pressure(double temperature_c);

/// Membrane water activity per the configured saturation-pressure model.
double water_activity(const OperatingPoint& pt, const PhysicsParams& p);

/// Springer water content 0.043 + 17.81a - 39.85a^2 + 36a^3.
/// Throws std::domain_error for a outside [0, 1].
double water_content(double activity);

/// Linearized-temperature diffusivities in cm^2/s, from T_m in kelvin.
/// Throws std::domain_error when the linearization drops to a non-positive
/// D_H2,w (far below the reference temperature).
Diffusivities diffusivity(double membrane_temperature_k, const PhysicsParams& p);

/// Runs the full mechanistic chain for one operating point and records all
/// intermediates. Requires i > 0 (the crossover ratio is undefined at i = 0)
/// and a positive diffusion path.
TransportState crossover_concentration(const OperatingPoint& pt, const PhysicsParams& p);

/// The 11 squared constraint residuals of a candidate state against the
/// governing equations, in order: Faraday H2, Faraday O2, Fick, Henry
/// cathode, Henry anode, thermal, water activity, water content, diffusion,
/// temperature dependence, crossover ratio. The mean of the entries is the
/// physics loss of the candidate.
Residuals11 physics_residuals(const OperatingPoint& pt, const TransportState& candidate,
                              const PhysicsParams& p);

} // namespace h2x
