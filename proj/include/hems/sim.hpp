#pragma once

// Discrete-time mission simulation at 1 s with strategy scheduling at each
// controller's own period, metric accumulation against the true (piecewise)
// models, scenario generation, and experiment sweeps.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hems/costs.hpp"
#include "hems/ems.hpp"
#include "hems/plant.hpp"

namespace hems::sim {

using costs::CostParams;
using costs::DegradationParams;
using costs::StaticCostModel;
using plant::Aging;
using plant::BatteryParams;
using plant::FuelCellParams;
using plant::OperatingLimits;

// --- deterministic RNG ----------------------------------------------------------

// splitmix64-seeded xorshift with a hand-rolled Box-Muller normal, so streams
// are identical across platforms and standard library versions
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
        for (int i = 0; i < 4; ++i) {
            z ^= z >> 30;
            z *= 0xbf58476d1ce4e5b9ULL;
            z ^= z >> 27;
            z *= 0x94d049bb133111ebULL;
            z ^= z >> 31;
            s_[i] = z ? z : 0x2545f4914f6cdd1dULL;
            z += 0x9e3779b97f4a7c15ULL;
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform() {  // in [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * M_PI * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    // integer in [lo, hi)
    uint64_t range(uint64_t lo, uint64_t hi) { return lo + next_u64() % (hi - lo); }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// --- missions -------------------------------------------------------------------

struct MissionProfile {
    std::string id;
    double source_period_s = 5.0;
    std::vector<double> p_load_kw;      // at the source resolution
    std::vector<double> v_kn, n_prop_s_rpm, n_prop_p_rpm, delta_s_deg, delta_p_deg;
    std::vector<double> p_load_1s;      // linear interpolation onto the 1 s grid

    bool has_covariates() const { return !v_kn.empty(); }
    double duration_s() const { return static_cast<double>(p_load_1s.size()); }

    void validate() const {
        if (p_load_kw.empty()) throw std::invalid_argument("MissionProfile: empty profile");
        for (double p : p_load_kw)
            if (p < 0) throw std::invalid_argument("MissionProfile: negative load");
    }

    void build_1s() {
        validate();
        const size_t n5 = p_load_kw.size();
        const auto n1 = static_cast<size_t>((n5 - 1) * source_period_s) + 1;
        p_load_1s.resize(n1);
        for (size_t t = 0; t < n1; ++t) {
            const double x = static_cast<double>(t) / source_period_s;
            const size_t i = std::min(static_cast<size_t>(x), n5 - 2);
            const double f = x - static_cast<double>(i);
            p_load_1s[t] = (1.0 - f) * p_load_kw[i] + f * p_load_kw[i + 1];
        }
    }
};

inline MissionProfile generate_rectangular_mission(double p_base_kw, double p_pulse_kw,
                                                   double t_pulse_start_s,
                                                   double t_pulse_len_s, double total_len_s,
                                                   const std::string& id = "rect") {
    if (total_len_s <= 0 || t_pulse_len_s < 0 || t_pulse_start_s < 0)
        throw std::invalid_argument("generate_rectangular_mission: durations must be >= 0");
    MissionProfile m;
    m.id = id;
    const auto n = static_cast<size_t>(total_len_s / m.source_period_s) + 1;
    m.p_load_kw.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * m.source_period_s;
        const bool in_pulse = t >= t_pulse_start_s && t < t_pulse_start_s + t_pulse_len_s;
        m.p_load_kw[i] = in_pulse ? p_pulse_kw : p_base_kw;
    }
    m.build_1s();
    return m;
}

struct RegimeSpec {
    double level_kw;
    double noise_frac;          // OU noise std as a fraction of the level
    double dwell_min_s, dwell_max_s;
    double speed_kn, prop_rpm, steer_std_deg;
};

struct SyntheticMissionParams {
    RegimeSpec idle{200.0, 0.05, 480, 900, 0.5, 150.0, 1.0};
    RegimeSpec sailing{1300.0, 0.05, 960, 1800, 6.0, 600.0, 3.0};
    RegimeSpec assist{3800.0, 0.15, 540, 1020, 8.0, 1100.0, 10.0};
    double p_sailing_to_assist = 0.55;
    double ou_corr_time_s = 60.0;
};

inline MissionProfile generate_synthetic_mission(uint64_t seed, double duration_s,
                                                 const SyntheticMissionParams& rp = {}) {
    if (duration_s <= 0)
        throw std::invalid_argument("generate_synthetic_mission: duration must be positive");
    Rng rng(seed);
    MissionProfile m;
    m.id = "syn-" + std::to_string(seed);
    const double dt = m.source_period_s;
    const auto n = static_cast<size_t>(duration_s / dt) + 1;
    m.p_load_kw.resize(n);
    m.v_kn.resize(n);
    m.n_prop_s_rpm.resize(n);
    m.n_prop_p_rpm.resize(n);
    m.delta_s_deg.resize(n);
    m.delta_p_deg.resize(n);

    const RegimeSpec* regs[3] = {&rp.idle, &rp.sailing, &rp.assist};
    int reg = 1;
    double x = 0.0;                             // OU fluctuation state
    const double theta = dt / rp.ou_corr_time_s;
    size_t t = 0;
    while (t < n) {
        const RegimeSpec& r = *regs[reg];
        const auto dwell = static_cast<size_t>(
            rng.range(static_cast<uint64_t>(r.dwell_min_s / dt),
                      static_cast<uint64_t>(r.dwell_max_s / dt) + 1));
        const double sig = r.noise_frac * r.level_kw;
        for (size_t k = 0; k < dwell && t < n; ++k, ++t) {
            x += -theta * x + std::sqrt(2.0 * theta) * sig * rng.normal();
            const double p = std::max(0.0, r.level_kw + x);
            m.p_load_kw[t] = p;
            const double rel = p / r.level_kw;
            m.v_kn[t] = std::max(0.0, r.speed_kn * std::sqrt(rel) + 0.1 * rng.normal());
            m.n_prop_s_rpm[t] = std::max(0.0, r.prop_rpm * std::pow(rel, 0.7) + 5.0 * rng.normal());
            m.n_prop_p_rpm[t] = std::max(0.0, r.prop_rpm * std::pow(rel, 0.7) + 5.0 * rng.normal());
            m.delta_s_deg[t] = r.steer_std_deg * rng.normal();
            m.delta_p_deg[t] = r.steer_std_deg * rng.normal();
        }
        if (reg == 0) reg = 1;
        else if (reg == 1) reg = rng.uniform() < rp.p_sailing_to_assist ? 2 : 0;
        else reg = 1;
    }
    m.build_1s();
    return m;
}

// energies (kWh) of maximal contiguous intervals with load above the threshold
inline std::vector<double> energy_bursts(const MissionProfile& m, double p_thresh_kw) {
    if (p_thresh_kw < 0) throw std::invalid_argument("energy_bursts: negative threshold");
    std::vector<double> bursts;
    double acc = 0.0;
    bool in_burst = false;
    for (double p : m.p_load_1s) {
        if (p > p_thresh_kw) {
            acc += (p - p_thresh_kw) / 3600.0;
            in_burst = true;
        } else if (in_burst) {
            bursts.push_back(acc);
            acc = 0.0;
            in_burst = false;
        }
    }
    if (in_burst) bursts.push_back(acc);
    return bursts;
}

// --- simulation -----------------------------------------------------------------

enum class Strategy { Filter, Ecms, Mpc };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Filter: return "filter";
        case Strategy::Ecms: return "ecms";
        default: return "mpc";
    }
}

enum class ForecastMode { Perfect, Persistence, External, Model };

struct PlantSet {
    FuelCellParams fc = plant::calibrated_fc_defaults();
    BatteryParams bat;
    OperatingLimits lim;
    DegradationParams deg;
    CostParams cost;
};

// per-MPC-step mean loads; the callback hook stands in for model-based sources
using ForecastHook = std::function<std::vector<double>(const MissionProfile&, size_t t0_s,
                                                       int n_steps, double t_step_s)>;

struct SimConfig {
    double t_sim_s = 1.0;
    Strategy strategy = Strategy::Mpc;
    Aging aging = Aging::Bol;
    double xi_init = 0.5;
    std::optional<double> p_fc_init_kw;   // default: strategy equilibrium

    ems::FilterConfig filter;
    double t_ecms_s = 5.0;
    double mu_scale = 0.01;               // ECMS dynamic cost = scale * dv_dyn2
    int n_mpc = 30;
    double t_mpc_s = 30.0;
    bool include_battery_losses = true;
    bool soc_adaptation = true;
    bool terminal_value = true;

    double xi_ref = 0.5;
    double p_fc_ref_kw = 0.0;             // 0 -> 0.4 * P_fc_max(BOL)

    ForecastMode forecast = ForecastMode::Perfect;
    ForecastHook forecast_hook;           // used when forecast == Model
    const std::vector<double>* external_5s = nullptr;  // t-aligned 5 s series
};

struct Violation {
    double t_s;
    std::string kind;
    double magnitude;
};

struct SimResult {
    std::vector<double> t_s, p_load_kw, p_fc_kw, p_bat_kw, soc, u_kw_s;
    double h2_kg = 0.0;
    double h2_soc_corrected_kg = 0.0;
    double deg_static_uv = 0.0;
    double deg_dynamic_uv = 0.0;
    double cost_eur = 0.0;
    double final_soc = 0.5;
    double energy_gap_kwh = 0.0;          // battery-current clamping mismatch
    int emergencies = 0;
    int solver_fallbacks = 0;
    double soc_violation_s = 0.0;
    std::vector<Violation> violations;
    double wall_s = 0.0;

    double deg_total_uv() const { return deg_static_uv + deg_dynamic_uv; }
};

namespace detail {

inline std::vector<double> preview_means(const MissionProfile& m, size_t t0, int n_steps,
                                         double t_step_s) {
    std::vector<double> out(static_cast<size_t>(n_steps));
    const auto n = m.p_load_1s.size();
    for (int j = 0; j < n_steps; ++j) {
        const size_t s = t0 + static_cast<size_t>(j * t_step_s);
        double acc = 0.0;
        int cnt = 0;
        for (size_t k = s; k < std::min(n, s + static_cast<size_t>(t_step_s)); ++k) {
            acc += m.p_load_1s[k];
            ++cnt;
        }
        out[static_cast<size_t>(j)] = cnt > 0 ? acc / cnt : m.p_load_1s.back();
    }
    return out;
}

inline std::vector<double> external_means(const std::vector<double>& f5s, size_t t0,
                                          int n_steps, double t_step_s) {
    std::vector<double> out(static_cast<size_t>(n_steps));
    const size_t i0 = t0 / 5;
    const auto per = static_cast<size_t>(t_step_s / 5.0);
    for (int j = 0; j < n_steps; ++j) {
        double acc = 0.0;
        int cnt = 0;
        for (size_t k = 0; k < per; ++k) {
            const size_t idx = i0 + static_cast<size_t>(j) * per + k;
            if (idx < f5s.size()) {
                acc += f5s[idx];
                ++cnt;
            }
        }
        out[static_cast<size_t>(j)] =
            cnt > 0 ? acc / cnt : (f5s.empty() ? 0.0 : f5s.back());
    }
    return out;
}

} // namespace detail

inline SimResult run_mission(const MissionProfile& m, const SimConfig& cfg,
                             const PlantSet& ps, const StaticCostModel* model_opt = nullptr) {
    const auto t_begin = std::chrono::steady_clock::now();
    ps.fc.validate();
    ps.bat.validate();
    ps.lim.validate();
    ps.deg.validate();

    const Aging aging = cfg.aging;
    StaticCostModel local_model;
    const StaticCostModel* model = model_opt;
    if (!model) {
        local_model = costs::build_static_cost_model(ps.fc, ps.lim, ps.deg, ps.cost, aging);
        model = &local_model;
    }
    const double pmax = model->p_fc_max_kw;
    const double p_ref =
        cfg.p_fc_ref_kw > 0 ? cfg.p_fc_ref_kw : 0.4 * ps.lim.p_fc_max(Aging::Bol);
    const ems::LambdaCurve lam = ems::build_lambda(*model, ps.lim, cfg.xi_ref,
                                                   std::min(p_ref, pmax));

    ems::FilterController filter(cfg.filter);
    ems::EcmsConfig ecms;
    ecms.lambda = lam;
    ecms.mu = cfg.mu_scale * ps.deg.dv_dyn2(pmax);
    ecms.xi_ref = cfg.xi_ref;
    ecms.p_fc_ref_kw = p_ref;
    ecms.t_ecms_s = cfg.t_ecms_s;
    ecms.soc_adaptation = cfg.soc_adaptation;

    ems::MpcConfig mc;
    mc.n_mpc = cfg.n_mpc;
    mc.t_mpc_s = cfg.t_mpc_s;
    mc.include_battery_losses = cfg.include_battery_losses;
    mc.soc_adaptation = cfg.soc_adaptation;
    mc.terminal_value = cfg.terminal_value;
    mc.lambda = lam;
    mc.xi_ref = cfg.xi_ref;
    mc.p_fc_ref_kw = p_ref;
    mc = ems::MpcController::with_dyn_cost(mc, ps.deg, pmax);
    ems::MpcController mpc(mc, ps.deg);

    const auto n = m.p_load_1s.size();
    SimResult r;
    r.t_s.reserve(n);
    r.p_load_kw.reserve(n);
    r.p_fc_kw.reserve(n);
    r.p_bat_kw.reserve(n);
    r.soc.reserve(n);
    r.u_kw_s.reserve(n);

    double p_fc = 0.0;
    if (cfg.p_fc_init_kw) {
        p_fc = std::clamp(*cfg.p_fc_init_kw, 0.0, pmax);
    } else if (cfg.strategy == Strategy::Filter) {
        p_fc = std::clamp(m.p_load_1s[0] + cfg.filter.k_soc_kw * (cfg.filter.xi_ref - cfg.xi_init),
                          0.0, pmax);
    } else {
        const double l0 = lam.eval(cfg.soc_adaptation ? cfg.xi_init : cfg.xi_ref);
        p_fc = model->total.a > 0
                   ? std::clamp((l0 - model->total.b) / (2.0 * model->total.a), 0.0, pmax)
                   : m.p_load_1s[0];
    }
    double soc = cfg.xi_init;
    double u_cur = 0.0;
    const double e_cap = ps.bat.energy_kwh();
    const double p_bat_lim = ps.bat.e_oc_v * ps.bat.i_max_a / 1000.0;
    const int ecms_period = std::max(1, static_cast<int>(std::lround(cfg.t_ecms_s)));
    const int mpc_period = std::max(1, static_cast<int>(std::lround(cfg.t_mpc_s)));

    for (size_t t = 0; t < n; ++t) {
        const double d = m.p_load_1s[t];
        plant::SystemState x{p_fc, soc};
        if (cfg.strategy == Strategy::Filter) {
            u_cur = filter.step(x, d, cfg.t_sim_s, ps.lim, aging).pdot_fc_kw_s;
        } else if (cfg.strategy == Strategy::Ecms) {
            if (t % static_cast<size_t>(ecms_period) == 0) {
                const ems::ControlDecision dec = ecms_step(x, d, *model, ecms, ps.lim, ps.bat);
                u_cur = dec.pdot_fc_kw_s;
                if (dec.emergency) {
                    ++r.emergencies;
                    r.violations.push_back({static_cast<double>(t), "ecms-emergency", soc});
                }
            }
        } else {
            if (t % static_cast<size_t>(mpc_period) == 0) {
                std::vector<double> preview;
                switch (cfg.forecast) {
                    case ForecastMode::Perfect:
                        preview = detail::preview_means(m, t, cfg.n_mpc, cfg.t_mpc_s);
                        break;
                    case ForecastMode::Persistence:
                        preview.assign(static_cast<size_t>(cfg.n_mpc), d);
                        break;
                    case ForecastMode::External:
                        if (!cfg.external_5s)
                            throw std::invalid_argument("run_mission: external forecast missing");
                        preview = detail::external_means(*cfg.external_5s, t, cfg.n_mpc,
                                                         cfg.t_mpc_s);
                        break;
                    case ForecastMode::Model:
                        if (!cfg.forecast_hook)
                            throw std::invalid_argument("run_mission: forecast hook missing");
                        preview = cfg.forecast_hook(m, t, cfg.n_mpc, cfg.t_mpc_s);
                        break;
                }
                const ems::ControlDecision dec = mpc.step(x, preview, *model, ps.lim, ps.bat);
                u_cur = dec.pdot_fc_kw_s;
                if (dec.solver_fallback) ++r.solver_fallbacks;
                if (dec.emergency || dec.soc_softened) {
                    ++r.emergencies;
                    r.violations.push_back({static_cast<double>(t), "mpc-soc-softened", soc});
                }
            }
        }

        // integrate one second: FC ramps at the commanded gradient, battery absorbs
        // the residual (trapezoidal step power per Eq.-(6) bookkeeping)
        const double p_next = std::clamp(p_fc + u_cur * cfg.t_sim_s, 0.0, pmax);
        const double u_eff = (p_next - p_fc) / cfg.t_sim_s;
        const double p_mid = 0.5 * (p_fc + p_next);
        double p_bat = d - p_mid;

        double p_bat_soc = p_bat;
        if (std::abs(p_bat) > p_bat_lim) {
            const double clamped = std::clamp(p_bat, -p_bat_lim, p_bat_lim);
            r.energy_gap_kwh += (p_bat - clamped) * cfg.t_sim_s / 3600.0;
            r.violations.push_back({static_cast<double>(t), "battery-current", p_bat});
            p_bat_soc = clamped;
        }
        soc -= p_bat_soc * cfg.t_sim_s / 3600.0 / e_cap;
        if (soc < ps.lim.soc_min - 1e-9 || soc > ps.lim.soc_max + 1e-9)
            r.soc_violation_s += cfg.t_sim_s;

        r.h2_kg += (p_mid > 0
                        ? costs::h2_mass_rate(plant::fc_current_from_power(p_mid, ps.fc, aging),
                                              ps.fc)
                        : 0.0) *
                   cfg.t_sim_s / 3600.0;
        r.deg_static_uv +=
            costs::static_degradation_rate(std::min(p_mid, pmax), pmax, ps.deg) *
            cfg.t_sim_s / 3600.0;
        r.deg_dynamic_uv += ps.deg.dv_dyn2(pmax) * u_eff * u_eff * cfg.t_sim_s;

        r.t_s.push_back(static_cast<double>(t));
        r.p_load_kw.push_back(d);
        r.p_fc_kw.push_back(p_mid);
        r.p_bat_kw.push_back(p_bat);
        r.soc.push_back(soc);
        r.u_kw_s.push_back(u_eff);

        p_fc = p_next;
    }

    r.final_soc = soc;
    // value end-vs-start stored energy at the reference specific consumption
    const double ref_p = std::min(p_ref, pmax);
    const double kg_per_kwh =
        costs::h2_mass_rate(plant::fc_current_from_power(ref_p, ps.fc, aging), ps.fc) / ref_p;
    r.h2_soc_corrected_kg = r.h2_kg + (cfg.xi_init - soc) * e_cap * kg_per_kwh;
    r.cost_eur = ps.cost.c_h2_eur_kg * r.h2_kg + model->c_deg_eur_uv * r.deg_total_uv();
    r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return r;
}

// --- sweeps ---------------------------------------------------------------------

struct SweepRow {
    std::string mission_id;
    Strategy strategy;
    Aging aging;
    double h2_kg = 0.0;
    double h2_corrected_kg = 0.0;
    double deg_uv = 0.0;
    double deg_static_uv = 0.0;
    double deg_dynamic_uv = 0.0;
    double cost_eur = 0.0;
    double duration_h = 0.0;
    int emergencies = 0;
    std::string error;   // non-empty when the mission run failed
};

struct SweepTotals {
    Strategy strategy;
    Aging aging;
    double h2_kg = 0.0;
    double h2_corrected_kg = 0.0;
    double deg_uv = 0.0;
    double cost_eur = 0.0;
    int failures = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;       // mission-major, deterministic order
    std::vector<SweepTotals> totals;  // per (strategy, aging)
};

struct StrategyVariant {
    std::string name;
    SimConfig cfg;
};

inline SweepResult sweep(const std::vector<MissionProfile>& missions,
                         const std::vector<StrategyVariant>& strategies,
                         const std::vector<Aging>& agings, const PlantSet& ps, int jobs = 0) {
    if (missions.empty() || strategies.empty() || agings.empty())
        throw std::invalid_argument("sweep: empty inputs");
    struct Task {
        size_t mi, si, ai;
    };
    std::vector<Task> tasks;
    for (size_t mi = 0; mi < missions.size(); ++mi)
        for (size_t si = 0; si < strategies.size(); ++si)
            for (size_t ai = 0; ai < agings.size(); ++ai) tasks.push_back({mi, si, ai});

    // static cost models are shared per aging
    std::vector<StaticCostModel> models;
    for (Aging a : agings)
        models.push_back(costs::build_static_cost_model(ps.fc, ps.lim, ps.deg, ps.cost, a));

    std::vector<SweepRow> rows(tasks.size());
    std::atomic<size_t> next{0};
    const int nw = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    auto worker = [&]() {
        for (;;) {
            const size_t k = next.fetch_add(1);
            if (k >= tasks.size()) return;
            const Task& tk = tasks[k];
            SweepRow row;
            row.mission_id = missions[tk.mi].id;
            row.strategy = strategies[tk.si].cfg.strategy;
            row.aging = agings[tk.ai];
            try {
                SimConfig cfg = strategies[tk.si].cfg;
                cfg.aging = agings[tk.ai];
                const SimResult res =
                    run_mission(missions[tk.mi], cfg, ps, &models[tk.ai]);
                row.h2_kg = res.h2_kg;
                row.h2_corrected_kg = res.h2_soc_corrected_kg;
                row.deg_uv = res.deg_total_uv();
                row.deg_static_uv = res.deg_static_uv;
                row.deg_dynamic_uv = res.deg_dynamic_uv;
                row.cost_eur = res.cost_eur;
                row.duration_h = missions[tk.mi].duration_s() / 3600.0;
                row.emergencies = res.emergencies;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows[k] = std::move(row);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < std::max(1, nw); ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SweepResult out;
    out.rows = std::move(rows);
    for (size_t si = 0; si < strategies.size(); ++si)
        for (size_t ai = 0; ai < agings.size(); ++ai) {
            SweepTotals tot;
            tot.strategy = strategies[si].cfg.strategy;
            tot.aging = agings[ai];
            for (size_t k = 0; k < tasks.size(); ++k) {
                if (tasks[k].si != si || tasks[k].ai != ai) continue;
                const SweepRow& row = out.rows[k];
                if (!row.error.empty()) {
                    ++tot.failures;
                    continue;
                }
                tot.h2_kg += row.h2_kg;
                tot.h2_corrected_kg += row.h2_corrected_kg;
                tot.deg_uv += row.deg_uv;
                tot.cost_eur += row.cost_eur;
            }
            out.totals.push_back(tot);
        }
    return out;
}

struct HorizonPoint {
    double horizon_min;
    double h2_kg = 0.0;
    double h2_corrected_kg = 0.0;
    double deg_uv = 0.0;
};

inline std::vector<HorizonPoint> horizon_sweep(const std::vector<MissionProfile>& missions,
                                               const std::vector<double>& horizons_min,
                                               const SimConfig& base, const PlantSet& ps,
                                               int jobs = 0) {
    std::vector<HorizonPoint> out;
    for (double h : horizons_min) {
        SimConfig cfg = base;
        cfg.strategy = Strategy::Mpc;
        cfg.forecast = ForecastMode::Perfect;
        const double steps = h * 60.0 / cfg.t_mpc_s;
        if (std::abs(steps - std::lround(steps)) > 1e-9)
            throw std::invalid_argument("horizon_sweep: horizon not a multiple of T_mpc");
        cfg.n_mpc = static_cast<int>(std::lround(steps));
        const SweepResult sr = sweep(missions, {{"mpc", cfg}}, {cfg.aging}, ps, jobs);
        HorizonPoint pt;
        pt.horizon_min = h;
        pt.h2_kg = sr.totals[0].h2_kg;
        pt.h2_corrected_kg = sr.totals[0].h2_corrected_kg;
        pt.deg_uv = sr.totals[0].deg_uv;
        out.push_back(pt);
    }
    return out;
}

} // namespace hems::sim
