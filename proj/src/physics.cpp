#include "h2x/physics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace h2x {

SatPressureModel sat_pressure_model_from_string(const std::string& name) {
    if (name == "fixed_activity") return SatPressureModel::FixedActivity;
    if (name == "antoine") return SatPressureModel::Antoine;
    throw std::runtime_error("unknown sat_pressure_model: " + name);
}

std::string to_string(SatPressureModel model) {
    return model == SatPressureModel::FixedActivity ? "fixed_activity" : "antoine";
}

void PhysicsParams::validate() const {
    auto require_positive = [](double v, const char* name) {
        if (!(v > 0.0)) {
            throw std::domain_error(std::string("PhysicsParams.") + name +
                                    " must be strictly positive");
        }
    };
    require_positive(faraday_const, "faraday_const");
    require_positive(porosity, "porosity");
    require_positive(tortuosity, "tortuosity");
    require_positive(darcy_coeff, "darcy_coeff");
    require_positive(ref_temp, "ref_temp");
    require_positive(base_diffusivity, "base_diffusivity");
    require_positive(temp_coeff, "temp_coeff");
    require_positive(solubility_cathode, "solubility_cathode");
    require_positive(solubility_anode, "solubility_anode");
    require_positive(fixed_activity, "fixed_activity");
    if (fixed_activity > 1.0) {
        throw std::domain_error("PhysicsParams.fixed_activity must be in (0, 1]");
    }
}

std::vector<std::string> OperatingPoint::violations() const {
    std::vector<std::string> out;
    auto add = [&out](const std::string& msg) { out.push_back(msg); };
    if (!(temperature_stack >= 0.0 && temperature_stack <= 150.0)) {
        add("temperature_stack outside [0, 150] degC");
    }
    if (!(pressure_cathode >= 0.0)) add("pressure_cathode negative");
    if (!(pressure_anode >= 0.0)) add("pressure_anode negative");
    if (!(compression >= 0.0)) add("compression negative");
    if (!(thickness > compression)) add("thickness must exceed compression");
    if (!(current_density >= 0.0)) add("current_density negative");
    if (pt_interlayer != 0 && pt_interlayer != 1) add("pt_interlayer must be 0 or 1");
    if (membrane_id < 0) add("membrane_id negative");
    if (h2_concentration &&
        !(*h2_concentration >= 0.0 && *h2_concentration <= 20.0)) {
        add("h2_concentration outside [0, 20] %");
    }
    return out;
}

FaradayRates faraday_rates(double current_density, const PhysicsParams& p) {
    if (current_density < 0.0) {
        throw std::domain_error("faraday_rates: negative current density");
    }
    // O2 = H2 / 2 exactly: dividing by 2*F then by 2 keeps the ratio bit-exact.
    const double h2 = current_density / (2.0 * p.faraday_const);
    return {h2, h2 / 2.0};
}

double effective_cathode_pressure(double pressure_cathode, double current_density,
                                  const PhysicsParams& p) {
    if (pressure_cathode < 0.0) {
        throw std::domain_error("effective_cathode_pressure: negative pressure");
    }
    if (current_density < 0.0) {
        throw std::domain_error("effective_cathode_pressure: negative current density");
    }
    return std::sqrt(pressure_cathode * pressure_cathode +
                     p.darcy_coeff * current_density);
}

double membrane_temperature(double temperature_stack, double current_density) {
    return temperature_stack + 0.5 * current_density +
           0.1 * current_density * current_density;
}

double water_saturation_pressure(double temperature_c) {
    // Antoine correlation for water, 1..100 degC range, mmHg -> bar.
    const double log10_p_mmhg = 8.07131 - 1730.63 / (233.426 + temperature_c);
    return std::pow(10.0, log10_p_mmhg) * 1.333224e-3;
}

double water_activity(const OperatingPoint& pt, const PhysicsParams& p) {
    if (p.sat_pressure_model == SatPressureModel::FixedActivity) {
        return p.fixed_activity;
    }
    // No vapor partial-pressure input exists, so take the vapor as saturated
    // at stack temperature while the membrane sits at T_m; ohmic heating then
    // lowers the activity below 1.
    const double t_m = membrane_temperature(pt.temperature_stack, pt.current_density);
    const double a = water_saturation_pressure(pt.temperature_stack) /
                     water_saturation_pressure(t_m);
    return std::min(a, 1.0);
}

double water_content(double activity) {
    if (!(activity >= 0.0 && activity <= 1.0)) {
        throw std::domain_error("water_content: activity outside [0, 1]");
    }
    return 0.043 + 17.81 * activity - 39.85 * activity * activity +
           36.0 * activity * activity * activity;
}

Diffusivities diffusivity(double membrane_temperature_k, const PhysicsParams& p) {
    if (!(membrane_temperature_k > 0.0)) {
        throw std::domain_error("diffusivity: temperature must be positive kelvin");
    }
    const double h2_water = p.base_diffusivity * kCm2PerM2 *
                            (1.0 + p.temp_coeff * (membrane_temperature_k - p.ref_temp));
    if (!(h2_water > 0.0)) {
        throw std::domain_error(
            "diffusivity: linearized D_H2,w non-positive at this temperature");
    }
    return {h2_water, (p.porosity / p.tortuosity) * h2_water};
}

TransportState crossover_concentration(const OperatingPoint& pt, const PhysicsParams& p) {
    {
        const auto bad = pt.violations();
        if (!bad.empty()) {
            std::ostringstream msg;
            msg << "crossover_concentration: invalid operating point:";
            for (const auto& b : bad) msg << " " << b << ";";
            throw std::domain_error(msg.str());
        }
    }
    if (pt.current_density <= 0.0) {
        throw std::domain_error(
            "crossover_concentration: concentration undefined at zero current density");
    }

    TransportState s;
    const FaradayRates rates = faraday_rates(pt.current_density, p);
    s.m_h2 = rates.h2;
    s.m_o2 = rates.o2;
    s.t_m = membrane_temperature(pt.temperature_stack, pt.current_density);
    s.activity = water_activity(pt, p);
    s.water_content = water_content(s.activity);
    const Diffusivities d = diffusivity(s.t_m + kKelvinOffset, p);
    s.d_h2_water = d.h2_water;
    s.d_eff = d.effective;
    s.p_ca_eff = effective_cathode_pressure(pt.pressure_cathode, pt.current_density, p);
    s.c_sat_ca = p.solubility_cathode * s.p_ca_eff;
    s.c_sat_an = p.solubility_anode * pt.pressure_anode;
    s.t_dif = (pt.thickness - pt.compression) * kCmPerMicron;
    if (!(s.t_dif > 0.0)) {
        throw std::domain_error("crossover_concentration: non-positive diffusion path");
    }
    s.m_h2_crossover = s.d_eff * (s.c_sat_ca - s.c_sat_an) / s.t_dif;
    s.x_h2_cathodic = s.m_h2_crossover / s.m_o2 * 100.0;
    return s;
}

Residuals11 physics_residuals(const OperatingPoint& pt, const TransportState& candidate,
                              const PhysicsParams& p) {
    auto sq = [](double r) { return r * r; };
    const FaradayRates rates = faraday_rates(pt.current_density, p);
    const double t_dif = (pt.thickness - pt.compression) * kCmPerMicron;
    const double a_model = water_activity(pt, p);
    const double d_h2w_model =
        p.base_diffusivity * kCm2PerM2 *
        (1.0 + p.temp_coeff * (candidate.t_m + kKelvinOffset - p.ref_temp));

    Residuals11 r;
    r(0) = sq(candidate.m_h2 - rates.h2);
    r(1) = sq(candidate.m_o2 - rates.o2);
    r(2) = sq(candidate.m_h2_crossover -
              candidate.d_eff * (candidate.c_sat_ca - candidate.c_sat_an) / t_dif);
    r(3) = sq(candidate.c_sat_ca - p.solubility_cathode * candidate.p_ca_eff);
    r(4) = sq(candidate.c_sat_an - p.solubility_anode * pt.pressure_anode);
    r(5) = sq(candidate.t_m -
              membrane_temperature(pt.temperature_stack, pt.current_density));
    r(6) = sq(candidate.activity - a_model);
    r(7) = sq(candidate.water_content -
              (0.043 + 17.81 * candidate.activity -
               39.85 * candidate.activity * candidate.activity +
               36.0 * candidate.activity * candidate.activity * candidate.activity));
    r(8) = sq(candidate.d_eff - (p.porosity / p.tortuosity) * candidate.d_h2_water);
    r(9) = sq(candidate.d_h2_water - d_h2w_model);
    r(10) = sq(candidate.x_h2_cathodic -
               candidate.m_h2_crossover / candidate.m_o2 * 100.0);
    return r;
}

} // namespace h2x
