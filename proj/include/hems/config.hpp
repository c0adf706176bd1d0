#pragma once

// Toolkit configuration: a single JSON file with sections mirroring the module
// parameters. Unknown keys are rejected; every default carries a source tag
// that names the parameter set it comes from, emitted in the generated
// reference document.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hems/costs.hpp"
#include "hems/ems.hpp"
#include "hems/plant.hpp"
#include "hems/sim.hpp"

namespace hems::config {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

struct ForecastConfig {
    double delta_plus_s = 900.0;
    std::vector<double> delta_minus_grid_s{60.0, 600.0};
    std::vector<double> learning_rates{0.1};
    std::vector<int> max_depths{3, 5};
    std::vector<double> min_loss_reductions{0.0};
    std::vector<double> row_subsamples{0.8};
    std::vector<double> feature_subsamples{0.8};
    int max_trees = 300;
    double ar_ridge = 1e-3;
    double mape_floor_frac = 0.01;      // of the corpus mean load
};

struct ToolkitConfig {
    int schema_version = kSchemaVersion;
    bool fc_calibrated = true;          // calibrate E_oc/E_ts/alpha_aux to the targets
    plant::CalibrationTargets targets;
    plant::FuelCellParams fc;           // used as-is when fc_calibrated is false
    plant::BatteryParams battery;
    plant::OperatingLimits limits;
    costs::DegradationParams degradation;
    costs::CostParams cost;
    ems::FilterConfig filter;
    sim::SimConfig simulation;          // strategy, periods, flags, forecaster
    ForecastConfig forecast;

    sim::PlantSet plant_set() const {
        sim::PlantSet ps;
        ps.fc = fc_calibrated ? plant::calibrate_fc_params(targets, fc) : fc;
        ps.bat = battery;
        ps.lim = limits;
        ps.deg = degradation;
        ps.cost = cost;
        return ps;
    }
};

namespace detail {

inline void expect_keys(const json& j, const std::vector<std::string>& allowed,
                        const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            throw std::invalid_argument("config: unknown key '" + where + it.key() + "'");
    }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace detail

inline ToolkitConfig config_from_json(const json& j) {
    ToolkitConfig c;
    detail::expect_keys(j, {"schema_version", "plant", "costs", "ems", "simulation",
                            "forecast"},
                        "");
    detail::get_if(j, "schema_version", c.schema_version);
    if (c.schema_version != kSchemaVersion)
        throw std::invalid_argument("config: unsupported schema_version");

    if (j.contains("plant")) {
        const json& p = j.at("plant");
        detail::expect_keys(p, {"fuel_cell", "battery", "limits", "calibration"}, "plant.");
        if (p.contains("fuel_cell")) {
            const json& f = p.at("fuel_cell");
            detail::expect_keys(f,
                                {"e_oc_v", "n_s", "e_ts_v", "i_0_a", "t_d_s", "r_i_bol_ohm",
                                 "r_i_eol_ohm", "alpha_aux", "beta_xover"},
                                "plant.fuel_cell.");
            detail::get_if(f, "e_oc_v", c.fc.e_oc_v);
            detail::get_if(f, "n_s", c.fc.n_s);
            detail::get_if(f, "e_ts_v", c.fc.e_ts_v);
            detail::get_if(f, "i_0_a", c.fc.i_0_a);
            detail::get_if(f, "t_d_s", c.fc.t_d_s);
            detail::get_if(f, "r_i_bol_ohm", c.fc.r_i_bol_ohm);
            detail::get_if(f, "r_i_eol_ohm", c.fc.r_i_eol_ohm);
            detail::get_if(f, "alpha_aux", c.fc.alpha_aux);
            detail::get_if(f, "beta_xover", c.fc.beta_xover);
        }
        if (p.contains("calibration")) {
            const json& f = p.at("calibration");
            detail::expect_keys(f, {"enabled", "p_max_bol_kw", "p_max_eol_kw", "v_cell_min_v"},
                                "plant.calibration.");
            detail::get_if(f, "enabled", c.fc_calibrated);
            detail::get_if(f, "p_max_bol_kw", c.targets.p_max_bol_kw);
            detail::get_if(f, "p_max_eol_kw", c.targets.p_max_eol_kw);
            detail::get_if(f, "v_cell_min_v", c.targets.v_cell_min_v);
        }
        if (p.contains("battery")) {
            const json& b = p.at("battery");
            detail::expect_keys(b, {"c_bat_ah", "r_i_ohm", "e_oc_v", "i_max_a"},
                                "plant.battery.");
            detail::get_if(b, "c_bat_ah", c.battery.c_bat_ah);
            detail::get_if(b, "r_i_ohm", c.battery.r_i_ohm);
            detail::get_if(b, "e_oc_v", c.battery.e_oc_v);
            detail::get_if(b, "i_max_a", c.battery.i_max_a);
        }
        if (p.contains("limits")) {
            const json& l = p.at("limits");
            detail::expect_keys(
                l, {"p_fc_max_bol_kw", "pdot_fc_max_kw_s", "soc_min", "soc_max"},
                "plant.limits.");
            detail::get_if(l, "p_fc_max_bol_kw", c.limits.p_fc_max_bol_kw);
            detail::get_if(l, "pdot_fc_max_kw_s", c.limits.pdot_fc_max_kw_s);
            detail::get_if(l, "soc_min", c.limits.soc_min);
            detail::get_if(l, "soc_max", c.limits.soc_max);
        }
    }
    if (j.contains("costs")) {
        const json& q = j.at("costs");
        detail::expect_keys(q, {"degradation", "cost"}, "costs.");
        if (q.contains("degradation")) {
            const json& d = q.at("degradation");
            detail::expect_keys(d,
                                {"p_lo", "p_hi", "dv_lo", "dv_hi", "dv_base", "dv_dyn",
                                 "dt_dyn", "w_blend"},
                                "costs.degradation.");
            detail::get_if(d, "p_lo", c.degradation.p_lo);
            detail::get_if(d, "p_hi", c.degradation.p_hi);
            detail::get_if(d, "dv_lo", c.degradation.dv_lo);
            detail::get_if(d, "dv_hi", c.degradation.dv_hi);
            detail::get_if(d, "dv_base", c.degradation.dv_base);
            detail::get_if(d, "dv_dyn", c.degradation.dv_dyn);
            detail::get_if(d, "dt_dyn", c.degradation.dt_dyn);
            detail::get_if(d, "w_blend", c.degradation.w_blend);
        }
        if (q.contains("cost")) {
            const json& d = q.at("cost");
            detail::expect_keys(d,
                                {"c_h2_eur_kg", "c_fc_capex_eur_kw", "r_fc_stack", "r_eol",
                                 "v_fc_min_v", "n_s"},
                                "costs.cost.");
            detail::get_if(d, "c_h2_eur_kg", c.cost.c_h2_eur_kg);
            detail::get_if(d, "c_fc_capex_eur_kw", c.cost.c_fc_capex_eur_kw);
            detail::get_if(d, "r_fc_stack", c.cost.r_fc_stack);
            detail::get_if(d, "r_eol", c.cost.r_eol);
            detail::get_if(d, "v_fc_min_v", c.cost.v_fc_min_v);
            detail::get_if(d, "n_s", c.cost.n_s);
        }
    }
    if (j.contains("ems")) {
        const json& e = j.at("ems");
        detail::expect_keys(e, {"filter", "ecms", "mpc", "xi_ref", "p_fc_ref_kw"}, "ems.");
        detail::get_if(e, "xi_ref", c.simulation.xi_ref);
        detail::get_if(e, "p_fc_ref_kw", c.simulation.p_fc_ref_kw);
        if (e.contains("filter")) {
            const json& f = e.at("filter");
            detail::expect_keys(f, {"tau_fd_s", "k_soc_kw", "xi_ref"}, "ems.filter.");
            detail::get_if(f, "tau_fd_s", c.filter.tau_fd_s);
            detail::get_if(f, "k_soc_kw", c.filter.k_soc_kw);
            detail::get_if(f, "xi_ref", c.filter.xi_ref);
        }
        if (e.contains("ecms")) {
            const json& f = e.at("ecms");
            detail::expect_keys(f, {"t_ecms_s", "mu_scale", "soc_adaptation"}, "ems.ecms.");
            detail::get_if(f, "t_ecms_s", c.simulation.t_ecms_s);
            detail::get_if(f, "mu_scale", c.simulation.mu_scale);
            detail::get_if(f, "soc_adaptation", c.simulation.soc_adaptation);
        }
        if (e.contains("mpc")) {
            const json& f = e.at("mpc");
            detail::expect_keys(f,
                                {"n_mpc", "t_mpc_s", "include_battery_losses",
                                 "soc_adaptation", "terminal_value"},
                                "ems.mpc.");
            detail::get_if(f, "n_mpc", c.simulation.n_mpc);
            detail::get_if(f, "t_mpc_s", c.simulation.t_mpc_s);
            detail::get_if(f, "include_battery_losses", c.simulation.include_battery_losses);
            detail::get_if(f, "soc_adaptation", c.simulation.soc_adaptation);
            detail::get_if(f, "terminal_value", c.simulation.terminal_value);
        }
    }
    if (j.contains("simulation")) {
        const json& s = j.at("simulation");
        detail::expect_keys(s, {"strategy", "aging", "xi_init", "p_fc_init_kw", "forecaster"},
                            "simulation.");
        if (s.contains("strategy")) {
            const std::string v = s.at("strategy").get<std::string>();
            if (v == "filter") c.simulation.strategy = sim::Strategy::Filter;
            else if (v == "ecms") c.simulation.strategy = sim::Strategy::Ecms;
            else if (v == "mpc") c.simulation.strategy = sim::Strategy::Mpc;
            else throw std::invalid_argument("config: unknown strategy '" + v + "'");
        }
        if (s.contains("aging")) {
            const std::string v = s.at("aging").get<std::string>();
            if (v == "bol") c.simulation.aging = plant::Aging::Bol;
            else if (v == "eol") c.simulation.aging = plant::Aging::Eol;
            else throw std::invalid_argument("config: unknown aging '" + v + "'");
        }
        detail::get_if(s, "xi_init", c.simulation.xi_init);
        if (s.contains("p_fc_init_kw"))
            c.simulation.p_fc_init_kw = s.at("p_fc_init_kw").get<double>();
        if (s.contains("forecaster")) {
            const std::string v = s.at("forecaster").get<std::string>();
            if (v == "perfect") c.simulation.forecast = sim::ForecastMode::Perfect;
            else if (v == "persistence") c.simulation.forecast = sim::ForecastMode::Persistence;
            else if (v == "external") c.simulation.forecast = sim::ForecastMode::External;
            else if (v == "gbt" || v == "ar" || v == "gbt+external")
                c.simulation.forecast = sim::ForecastMode::Model;
            else throw std::invalid_argument("config: unknown forecaster '" + v + "'");
        }
    }
    if (j.contains("forecast")) {
        const json& s = j.at("forecast");
        detail::expect_keys(s,
                            {"delta_plus_s", "delta_minus_grid_s", "learning_rates",
                             "max_depths", "min_loss_reductions", "row_subsamples",
                             "feature_subsamples", "max_trees", "ar_ridge",
                             "mape_floor_frac"},
                            "forecast.");
        detail::get_if(s, "delta_plus_s", c.forecast.delta_plus_s);
        detail::get_if(s, "delta_minus_grid_s", c.forecast.delta_minus_grid_s);
        detail::get_if(s, "learning_rates", c.forecast.learning_rates);
        detail::get_if(s, "max_depths", c.forecast.max_depths);
        detail::get_if(s, "min_loss_reductions", c.forecast.min_loss_reductions);
        detail::get_if(s, "row_subsamples", c.forecast.row_subsamples);
        detail::get_if(s, "feature_subsamples", c.forecast.feature_subsamples);
        detail::get_if(s, "max_trees", c.forecast.max_trees);
        detail::get_if(s, "ar_ridge", c.forecast.ar_ridge);
        detail::get_if(s, "mape_floor_frac", c.forecast.mape_floor_frac);
    }
    return c;
}

inline ToolkitConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j;
    in >> j;
    return config_from_json(j);
}

// --- generated reference doc -----------------------------------------------------

struct DefaultEntry {
    std::string path, value, unit, source;
};

inline std::string csv_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::vector<DefaultEntry> default_entries() {
    const ToolkitConfig c;
    auto num = [](double v) { return csv_num(v); };
    return {
        {"plant.calibration.p_max_bol_kw", num(c.targets.p_max_bol_kw), "kW",
         "fc_battery_parameters: max net FC power"},
        {"plant.calibration.p_max_eol_kw", num(c.targets.p_max_eol_kw), "kW",
         "derived: 90 % of the BOL rating at end of life"},
        {"plant.calibration.v_cell_min_v", num(c.targets.v_cell_min_v), "V",
         "derived: inverts the degradation-cost constant against cost_parameters"},
        {"plant.fuel_cell.n_s", num(c.fc.n_s), "-", "toolkit default: editable cell count"},
        {"plant.fuel_cell.e_ts_v", num(c.fc.e_ts_v), "V",
         "toolkit default: replaced by calibration when enabled"},
        {"plant.fuel_cell.i_0_a", num(c.fc.i_0_a), "A", "toolkit default: exchange current"},
        {"plant.fuel_cell.t_d_s", num(c.fc.t_d_s), "s",
         "toolkit default: settling time, value not published"},
        {"plant.fuel_cell.r_i_bol_ohm", num(c.fc.r_i_bol_ohm), "Ohm",
         "fc_battery_parameters: FC resistance (BOL)"},
        {"plant.fuel_cell.r_i_eol_ohm", num(c.fc.r_i_eol_ohm), "Ohm",
         "fc_battery_parameters: FC resistance (EOL)"},
        {"plant.fuel_cell.beta_xover", num(c.fc.beta_xover), "-",
         "toolkit default: crossover loss fraction"},
        {"plant.battery.c_bat_ah", num(c.battery.c_bat_ah), "Ah",
         "fc_battery_parameters: battery capacity"},
        {"plant.battery.r_i_ohm", num(c.battery.r_i_ohm), "Ohm",
         "fc_battery_parameters: battery internal resistance"},
        {"plant.battery.e_oc_v", num(c.battery.e_oc_v), "V",
         "derived: 1250 kWh installed energy over 3125 Ah"},
        {"plant.battery.i_max_a", num(c.battery.i_max_a), "A",
         "fc_battery_parameters: maximum battery current"},
        {"plant.limits.p_fc_max_bol_kw", num(c.limits.p_fc_max_bol_kw), "kW",
         "fc_battery_parameters: max net FC power"},
        {"plant.limits.pdot_fc_max_kw_s", num(c.limits.pdot_fc_max_kw_s), "kW/s",
         "fc_battery_parameters: max FC power gradient"},
        {"plant.limits.soc_min", num(c.limits.soc_min), "-",
         "derived: 60 % usable depth of discharge, centered"},
        {"plant.limits.soc_max", num(c.limits.soc_max), "-",
         "derived: 60 % usable depth of discharge, centered"},
        {"costs.degradation.p_lo", num(c.degradation.p_lo), "-",
         "degradation_parameters: low power threshold"},
        {"costs.degradation.p_hi", num(c.degradation.p_hi), "-",
         "degradation_parameters: high power threshold"},
        {"costs.degradation.dv_lo", num(c.degradation.dv_lo), "uV/h",
         "degradation_parameters: low power degradation"},
        {"costs.degradation.dv_hi", num(c.degradation.dv_hi), "uV/h",
         "degradation_parameters: high power degradation"},
        {"costs.degradation.dv_base", num(c.degradation.dv_base), "uV/h",
         "degradation_parameters: base degradation"},
        {"costs.degradation.dv_dyn", num(c.degradation.dv_dyn), "uV",
         "degradation_parameters: dynamic degradation per one-way full swing"},
        {"costs.degradation.dt_dyn", num(c.degradation.dt_dyn), "s",
         "degradation_parameters: reference ramp time"},
        {"costs.degradation.w_blend", num(c.degradation.w_blend), "-",
         "toolkit default: blend half-width keeping the quadratic fit within bounds"},
        {"costs.cost.c_h2_eur_kg", num(c.cost.c_h2_eur_kg), "eur/kg",
         "cost_parameters: hydrogen cost"},
        {"costs.cost.c_fc_capex_eur_kw", num(c.cost.c_fc_capex_eur_kw), "eur/kW",
         "cost_parameters: FC system cost"},
        {"costs.cost.r_fc_stack", num(c.cost.r_fc_stack), "-",
         "cost_parameters: FC stack cost ratio"},
        {"costs.cost.r_eol", num(c.cost.r_eol), "-",
         "cost_parameters: FC power loss at end of life"},
        {"costs.cost.v_fc_min_v", num(c.cost.v_fc_min_v), "V",
         "derived: stack voltage at rated current matching the 50.6 eur/uV constant"},
        {"costs.cost.n_s", num(c.cost.n_s), "-", "toolkit default: series cell count"},
        {"ems.filter.tau_fd_s", num(c.filter.tau_fd_s), "s",
         "toolkit default: benchmark decoupling time constant"},
        {"ems.filter.k_soc_kw", num(c.filter.k_soc_kw), "kW",
         "toolkit default: proportional SoC correction"},
        {"ems.ecms.t_ecms_s", num(c.simulation.t_ecms_s), "s",
         "simulation_settings: ECMS step width"},
        {"ems.ecms.mu_scale", num(c.simulation.mu_scale), "-",
         "simulation_settings: dynamic cost 0.01 x gradient-law coefficient"},
        {"ems.mpc.n_mpc", num(c.simulation.n_mpc), "-",
         "simulation_settings: control horizon"},
        {"ems.mpc.t_mpc_s", num(c.simulation.t_mpc_s), "s",
         "simulation_settings: MPC step width"},
        {"ems.xi_ref", num(c.simulation.xi_ref), "-",
         "toolkit default: reference state of charge"},
        {"ems.p_fc_ref_kw", "0 (0.4 x BOL rating)", "kW",
         "toolkit default: equivalence-factor anchor power, reported in outputs"},
        {"simulation.xi_init", num(c.simulation.xi_init), "-",
         "simulation_settings: initial SoC"},
        {"forecast.delta_plus_s", num(c.forecast.delta_plus_s), "s",
         "toolkit default: 15 min usable prediction horizon"},
        {"forecast.ar_ridge", num(c.forecast.ar_ridge), "-",
         "toolkit default: baseline regularization"},
        {"forecast.mape_floor_frac", num(c.forecast.mape_floor_frac), "-",
         "toolkit default: MAPE floor as a fraction of the corpus mean load"},
    };
}

inline std::string config_reference_markdown() {
    std::ostringstream os;
    os << "# Configuration reference\n\n"
       << "Every default lists the parameter set it comes from.\n\n"
       << "| key | default | unit | source |\n|---|---|---|---|\n";
    for (const DefaultEntry& e : default_entries())
        os << "| " << e.path << " | " << e.value << " | " << e.unit << " | " << e.source
           << " |\n";
    return os.str();
}

inline json default_config_json() {
    const ToolkitConfig c;
    return json{
        {"schema_version", kSchemaVersion},
        {"plant",
         {{"calibration",
           {{"enabled", true},
            {"p_max_bol_kw", c.targets.p_max_bol_kw},
            {"p_max_eol_kw", c.targets.p_max_eol_kw},
            {"v_cell_min_v", c.targets.v_cell_min_v}}},
          {"fuel_cell",
           {{"n_s", c.fc.n_s},
            {"e_ts_v", c.fc.e_ts_v},
            {"i_0_a", c.fc.i_0_a},
            {"t_d_s", c.fc.t_d_s},
            {"r_i_bol_ohm", c.fc.r_i_bol_ohm},
            {"r_i_eol_ohm", c.fc.r_i_eol_ohm},
            {"beta_xover", c.fc.beta_xover}}},
          {"battery",
           {{"c_bat_ah", c.battery.c_bat_ah},
            {"r_i_ohm", c.battery.r_i_ohm},
            {"e_oc_v", c.battery.e_oc_v},
            {"i_max_a", c.battery.i_max_a}}},
          {"limits",
           {{"p_fc_max_bol_kw", c.limits.p_fc_max_bol_kw},
            {"pdot_fc_max_kw_s", c.limits.pdot_fc_max_kw_s},
            {"soc_min", c.limits.soc_min},
            {"soc_max", c.limits.soc_max}}}}},
        {"costs",
         {{"degradation",
           {{"p_lo", c.degradation.p_lo},
            {"p_hi", c.degradation.p_hi},
            {"dv_lo", c.degradation.dv_lo},
            {"dv_hi", c.degradation.dv_hi},
            {"dv_base", c.degradation.dv_base},
            {"dv_dyn", c.degradation.dv_dyn},
            {"dt_dyn", c.degradation.dt_dyn},
            {"w_blend", c.degradation.w_blend}}},
          {"cost",
           {{"c_h2_eur_kg", c.cost.c_h2_eur_kg},
            {"c_fc_capex_eur_kw", c.cost.c_fc_capex_eur_kw},
            {"r_fc_stack", c.cost.r_fc_stack},
            {"r_eol", c.cost.r_eol},
            {"v_fc_min_v", c.cost.v_fc_min_v},
            {"n_s", c.cost.n_s}}}}},
        {"ems",
         {{"filter",
           {{"tau_fd_s", c.filter.tau_fd_s},
            {"k_soc_kw", c.filter.k_soc_kw},
            {"xi_ref", c.filter.xi_ref}}},
          {"ecms",
           {{"t_ecms_s", c.simulation.t_ecms_s},
            {"mu_scale", c.simulation.mu_scale},
            {"soc_adaptation", c.simulation.soc_adaptation}}},
          {"mpc",
           {{"n_mpc", c.simulation.n_mpc},
            {"t_mpc_s", c.simulation.t_mpc_s},
            {"include_battery_losses", c.simulation.include_battery_losses},
            {"soc_adaptation", c.simulation.soc_adaptation},
            {"terminal_value", c.simulation.terminal_value}}},
          {"xi_ref", c.simulation.xi_ref},
          {"p_fc_ref_kw", c.simulation.p_fc_ref_kw}}},
        {"simulation",
         {{"strategy", "mpc"},
          {"aging", "bol"},
          {"xi_init", c.simulation.xi_init},
          {"forecaster", "perfect"}}},
        {"forecast",
         {{"delta_plus_s", c.forecast.delta_plus_s},
          {"delta_minus_grid_s", c.forecast.delta_minus_grid_s},
          {"learning_rates", c.forecast.learning_rates},
          {"max_depths", c.forecast.max_depths},
          {"min_loss_reductions", c.forecast.min_loss_reductions},
          {"row_subsamples", c.forecast.row_subsamples},
          {"feature_subsamples", c.forecast.feature_subsamples},
          {"max_trees", c.forecast.max_trees},
          {"ar_ridge", c.forecast.ar_ridge},
          {"mape_floor_frac", c.forecast.mape_floor_frac}}}};
}

} // namespace hems::config
