#include "h2x/config_io.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace h2x {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_physics(const json& j, PhysicsParams& p) {
    maybe(j, "faraday_const", p.faraday_const);
    maybe(j, "porosity", p.porosity);
    maybe(j, "tortuosity", p.tortuosity);
    maybe(j, "darcy_coeff", p.darcy_coeff);
    maybe(j, "ref_temp", p.ref_temp);
    maybe(j, "base_diffusivity", p.base_diffusivity);
    maybe(j, "temp_coeff", p.temp_coeff);
    maybe(j, "solubility_cathode", p.solubility_cathode);
    maybe(j, "solubility_anode", p.solubility_anode);
    maybe(j, "fixed_activity", p.fixed_activity);
    if (j.contains("sat_pressure_model")) {
        p.sat_pressure_model =
            sat_pressure_model_from_string(j.at("sat_pressure_model").get<std::string>());
    }
    p.validate();
}

void parse_train(const json& j, TrainConfig& t) {
    maybe(j, "physics_weight", t.physics_weight);
    maybe(j, "lr", t.lr);
    maybe(j, "batch_size", t.batch_size);
    maybe(j, "max_epochs", t.max_epochs);
    maybe(j, "base_seed", t.base_seed);
    if (j.contains("adam_moments")) {
        const json& a = j.at("adam_moments");
        maybe(a, "gamma1", t.adam_moments.gamma1);
        maybe(a, "gamma2", t.adam_moments.gamma2);
        maybe(a, "epsilon", t.adam_moments.epsilon);
    }
    if (j.contains("plateau")) {
        const json& p = j.at("plateau");
        maybe(p, "factor", t.plateau.factor);
        maybe(p, "patience", t.plateau.patience);
        maybe(p, "lr_min", t.plateau.lr_min);
    }
    if (j.contains("early_stop")) {
        const json& e = j.at("early_stop");
        maybe(e, "patience", t.early_stop.patience);
        maybe(e, "min_delta", t.early_stop.min_delta);
    }
    t.validate();
}

void parse_augment(const json& j, AugmentConfig& a) {
    maybe(j, "max_points_per_gap", a.max_points_per_gap);
    maybe(j, "physics_tolerance", a.physics_tolerance);
    maybe(j, "bounds_lo", a.bounds_lo);
    maybe(j, "bounds_hi", a.bounds_hi);
    maybe(j, "enforce_monotone", a.enforce_monotone);
    a.validate();
}

void parse_fusion(const json& j, FusionConfig& f) {
    maybe(j, "fusion_weight", f.fusion_weight);
    maybe(j, "enabled", f.enabled);
    maybe(j, "clamp_output", f.clamp_output);
    f.validate();
}

void parse_split(const json& j, SplitSpec& s) {
    maybe(j, "train_frac", s.train_frac);
    maybe(j, "val_frac", s.val_frac);
    maybe(j, "test_frac", s.test_frac);
    maybe(j, "stratify_key", s.stratify_key);
    maybe(j, "seed", s.seed);
    s.validate();
}

} // namespace

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_config: cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("load_config: " + path + ": " + e.what());
    }
    AppConfig cfg;
    if (j.contains("physics")) parse_physics(j.at("physics"), cfg.physics);
    if (j.contains("train")) parse_train(j.at("train"), cfg.train);
    if (j.contains("augment")) parse_augment(j.at("augment"), cfg.augment);
    if (j.contains("fusion")) parse_fusion(j.at("fusion"), cfg.fusion);
    if (j.contains("split")) parse_split(j.at("split"), cfg.split);
    return cfg;
}

void save_config(const AppConfig& cfg, const std::string& path) {
    json j;
    j["physics"] = {
        {"faraday_const", cfg.physics.faraday_const},
        {"porosity", cfg.physics.porosity},
        {"tortuosity", cfg.physics.tortuosity},
        {"darcy_coeff", cfg.physics.darcy_coeff},
        {"ref_temp", cfg.physics.ref_temp},
        {"base_diffusivity", cfg.physics.base_diffusivity},
        {"temp_coeff", cfg.physics.temp_coeff},
        {"solubility_cathode", cfg.physics.solubility_cathode},
        {"solubility_anode", cfg.physics.solubility_anode},
        {"fixed_activity", cfg.physics.fixed_activity},
        {"sat_pressure_model", to_string(cfg.physics.sat_pressure_model)},
    };
    j["train"] = {
        {"physics_weight", cfg.train.physics_weight},
        {"lr", cfg.train.lr},
        {"adam_moments",
         {{"gamma1", cfg.train.adam_moments.gamma1},
          {"gamma2", cfg.train.adam_moments.gamma2},
          {"epsilon", cfg.train.adam_moments.epsilon}}},
        {"batch_size", cfg.train.batch_size},
        {"max_epochs", cfg.train.max_epochs},
        {"plateau",
         {{"factor", cfg.train.plateau.factor},
          {"patience", cfg.train.plateau.patience},
          {"lr_min", cfg.train.plateau.lr_min}}},
        {"early_stop",
         {{"patience", cfg.train.early_stop.patience},
          {"min_delta", cfg.train.early_stop.min_delta}}},
        {"base_seed", cfg.train.base_seed},
    };
    j["augment"] = {
        {"max_points_per_gap", cfg.augment.max_points_per_gap},
        {"physics_tolerance", cfg.augment.physics_tolerance},
        {"bounds_lo", cfg.augment.bounds_lo},
        {"bounds_hi", cfg.augment.bounds_hi},
        {"enforce_monotone", cfg.augment.enforce_monotone},
    };
    j["fusion"] = {
        {"fusion_weight", cfg.fusion.fusion_weight},
        {"enabled", cfg.fusion.enabled},
        {"clamp_output", cfg.fusion.clamp_output},
    };
    j["split"] = {
        {"train_frac", cfg.split.train_frac},
        {"val_frac", cfg.split.val_frac},
        {"test_frac", cfg.split.test_frac},
        {"stratify_key", cfg.split.stratify_key},
        {"seed", cfg.split.seed},
    };
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_config: cannot open " + path + " for writing");
    }
    out << j.dump(2) << "\n";
}

} // namespace h2x
