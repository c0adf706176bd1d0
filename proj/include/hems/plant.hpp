#pragma once

// Electrochemical component models, operating limits, and the discrete-time
// two-state system model shared by the controllers and the simulator.
//
// Conventions: powers in kW, currents in A, voltages in V, energies in kWh,
// state of charge as a fraction. Positive battery power means discharge.

#include <cmath>
#include <stdexcept>
#include <string>

namespace hems::plant {

enum class Aging { Bol, Eol };

inline const char* aging_name(Aging a) { return a == Aging::Bol ? "bol" : "eol"; }

struct FuelCellParams {
    double e_oc_v = 0.0;        // open-circuit voltage of the lumped stack (V)
    double n_s = 1100.0;        // series cell count
    double e_ts_v = 0.06;       // Tafel slope per cell (V)
    double i_0_a = 1.0;         // exchange current (A)
    double t_d_s = 1.0;         // stack settling time (s); activation lag is t_d/3
    double r_i_bol_ohm = 0.0232;
    double r_i_eol_ohm = 0.0280;
    double alpha_aux = 0.05;    // auxiliary-power fraction of stack power
    double beta_xover = 0.02;   // hydrogen crossover loss fraction

    double r_i(Aging a) const { return a == Aging::Bol ? r_i_bol_ohm : r_i_eol_ohm; }

    void validate() const {
        if (e_oc_v <= 0 || n_s <= 0 || e_ts_v <= 0 || i_0_a <= 0 || t_d_s <= 0 ||
            r_i_bol_ohm <= 0 || r_i_eol_ohm <= 0)
            throw std::invalid_argument("FuelCellParams: fields must be strictly positive");
        if (r_i_eol_ohm < r_i_bol_ohm)
            throw std::invalid_argument("FuelCellParams: R_i(EOL) must be >= R_i(BOL)");
        if (alpha_aux < 0 || alpha_aux >= 1)
            throw std::invalid_argument("FuelCellParams: alpha_aux must be in [0,1)");
        if (beta_xover < 0 || beta_xover >= 0.2)
            throw std::invalid_argument("FuelCellParams: beta_xover must be in [0,0.2)");
    }
};

struct BatteryParams {
    double c_bat_ah = 3125.0;   // capacity (Ah)
    double r_i_ohm = 0.0024;    // internal resistance (Ohm)
    double e_oc_v = 400.0;      // open-circuit voltage, flat-curve approximation (V)
    double i_max_a = 9400.0;    // maximum |current| (A)

    double energy_kwh() const { return e_oc_v * c_bat_ah / 1000.0; }
    // largest discharge power representable by the source model (kW)
    double discharge_limit_kw() const { return e_oc_v * e_oc_v / (4.0 * r_i_ohm) / 1000.0; }

    void validate() const {
        if (c_bat_ah <= 0 || r_i_ohm <= 0 || e_oc_v <= 0 || i_max_a <= 0)
            throw std::invalid_argument("BatteryParams: fields must be strictly positive");
        if (discharge_limit_kw() <= e_oc_v * i_max_a / 1000.0)
            throw std::invalid_argument(
                "BatteryParams: current limit exceeds the source-model discharge limit");
    }
};

struct OperatingLimits {
    double p_fc_max_bol_kw = 4150.0;
    double pdot_fc_max_kw_s = 212.5;
    double soc_min = 0.2;
    double soc_max = 0.8;

    // EOL rating is 90 % of the BOL rating.
    double p_fc_max(Aging a) const {
        return a == Aging::Bol ? p_fc_max_bol_kw : 0.9 * p_fc_max_bol_kw;
    }

    void validate() const {
        if (p_fc_max_bol_kw <= 0 || pdot_fc_max_kw_s <= 0)
            throw std::invalid_argument("OperatingLimits: ratings must be positive");
        if (!(0 < soc_min && soc_min < soc_max && soc_max <= 1))
            throw std::invalid_argument("OperatingLimits: need 0 < soc_min < soc_max <= 1");
    }
};

struct SystemState {
    double p_fc_kw = 0.0;       // FC net power
    double soc = 0.5;           // battery state of charge
};

// x+ = A x + B u + Bd d with x = [p_fc, soc], u = pdot_fc (kW/s), d = p_load (kW).
// a21 = 1000*T_s/(E_oc*C_bat*3600); kW -> W and Ah -> As conversions folded in.
struct StateSpaceModel {
    double t_s_s = 1.0;
    double a21 = 0.0;           // soc gain per kW of FC power over one step

    StateSpaceModel() = default;
    StateSpaceModel(const BatteryParams& bat, double t_s)
        : t_s_s(t_s), a21(1000.0 * t_s / (bat.e_oc_v * bat.c_bat_ah * 3600.0)) {}

    double a(int r, int c) const {
        if (r == 0) return c == 0 ? 1.0 : 0.0;
        return c == 0 ? a21 : 1.0;
    }
    double b(int r) const { return r == 0 ? t_s_s : a21 * t_s_s / 2.0; }
    double b_d(int r) const { return r == 0 ? 0.0 : -a21; }
};

inline SystemState step_state(const SystemState& x, double u_kw_s, double d_kw,
                              const StateSpaceModel& m) {
    SystemState out;
    out.p_fc_kw = x.p_fc_kw + m.t_s_s * u_kw_s;
    out.soc = x.soc + m.a21 * x.p_fc_kw + m.a21 * m.t_s_s / 2.0 * u_kw_s - m.a21 * d_kw;
    return out;
}

// Battery power implied by the power balance over one step, Eq.-(6) style trapezoid.
inline double battery_power_kw(double p_fc_kw, double u_kw_s, double d_kw, double t_s) {
    return d_kw - p_fc_kw - t_s / 2.0 * u_kw_s;
}

// --- fuel cell polarization -------------------------------------------------

// steady stack voltage at current i (V); strictly decreasing in i
inline double fc_voltage(double i_fc_a, const FuelCellParams& fc, Aging aging) {
    if (!(i_fc_a > 0))
        throw std::domain_error("fc_voltage: current must be positive");
    return fc.e_oc_v - fc.n_s * fc.e_ts_v * std::log(i_fc_a / (fc.n_s * fc.i_0_a)) -
           fc.r_i(aging) * i_fc_a;
}

// First-order lag (time constant t_d/3) on the activation term, exact
// exponential discretization. Keeps per-run state; the ohmic term is not lagged.
class FcVoltageFilter {
  public:
    double step(double i_fc_a, const FuelCellParams& fc, Aging aging, double dt_s) {
        if (!(i_fc_a > 0))
            throw std::domain_error("fc_voltage(lagged): current must be positive");
        const double act = fc.n_s * fc.e_ts_v * std::log(i_fc_a / (fc.n_s * fc.i_0_a));
        const double tau = fc.t_d_s / 3.0;
        if (!primed_) {
            act_v_ = act;
            primed_ = true;
        } else {
            act_v_ += (1.0 - std::exp(-dt_s / tau)) * (act - act_v_);
        }
        return fc.e_oc_v - act_v_ - fc.r_i(aging) * i_fc_a;
    }
    void reset() { primed_ = false; }

  private:
    double act_v_ = 0.0;
    bool primed_ = false;
};

// net delivered power (kW): stack power minus the auxiliary fraction
inline double fc_net_power(double i_fc_a, const FuelCellParams& fc, Aging aging) {
    return (1.0 - fc.alpha_aux) * fc_voltage(i_fc_a, fc, aging) * i_fc_a / 1000.0;
}

namespace detail {

// d(i*v)/di = E - t*ln(i/(Ns*I0)) - t - 2R i with t = Ns*Ets; strictly decreasing.
inline double fc_power_slope(double i, const FuelCellParams& fc, Aging aging) {
    const double t = fc.n_s * fc.e_ts_v;
    return fc.e_oc_v - t * std::log(i / (fc.n_s * fc.i_0_a)) - t - 2.0 * fc.r_i(aging) * i;
}

// Newton from the right of the root; the slope is decreasing and convex in i,
// so the iterates stay bracketed and converge monotonically.
inline double fc_peak_current(const FuelCellParams& fc, Aging aging) {
    const double t = fc.n_s * fc.e_ts_v;
    const double r = fc.r_i(aging);
    double i = fc.n_s * fc.i_0_a;
    while (fc_power_slope(i, fc, aging) > 0) {
        i *= 2.0;
        if (i > 1e12) throw std::runtime_error("fc_peak_current: no bracket");
    }
    for (int k = 0; k < 80; ++k) {
        const double f = fc_power_slope(i, fc, aging);
        const double fp = -t / i - 2.0 * r;
        const double step = f / fp;
        const double next = i - step;
        if (next <= 0) {
            i *= 0.5;
            continue;
        }
        i = next;
        if (std::abs(step) < 1e-14 * i) break;
    }
    return i;
}

} // namespace detail

// peak of the net-power curve (kW) and the current where it occurs
inline double fc_max_net_power(const FuelCellParams& fc, Aging aging,
                               double* i_peak_a = nullptr) {
    const double ip = detail::fc_peak_current(fc, aging);
    if (i_peak_a) *i_peak_a = ip;
    return fc_net_power(ip, fc, aging);
}

// inverse of fc_net_power on the ascending branch (bisection); 1e-6 relative in power
inline double fc_current_from_power(double p_net_kw, const FuelCellParams& fc, Aging aging) {
    if (!(p_net_kw > 0))
        throw std::domain_error("fc_current_from_power: power must be positive");
    double i_pk = 0.0;
    const double p_pk = fc_max_net_power(fc, aging, &i_pk);
    if (p_net_kw > p_pk * (1.0 + 1e-12))
        throw std::domain_error("fc_current_from_power: requested power " +
                                std::to_string(p_net_kw) + " kW exceeds achievable max " +
                                std::to_string(p_pk) + " kW");
    double lo = 0.0, hi = i_pk;
    for (int k = 0; k < 100; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0.0) { lo = mid; continue; }
        (fc_net_power(mid, fc, aging) < p_net_kw ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// --- calibration --------------------------------------------------------------

struct CalibrationTargets {
    double p_max_bol_kw = 4150.0;
    double p_max_eol_kw = 3735.0;
    double v_cell_min_v = 0.615;   // cell voltage at the EOL rated (peak) current
};

struct CalibrationReport {
    double resid_p_bol_kw = 0.0;
    double resid_p_eol_kw = 0.0;
    double resid_v_cell_v = 0.0;
};

// Pins E_oc, E_ts and alpha_aux by nested bisection so the net-power curve
// peaks at the BOL/EOL targets and the EOL cell voltage at peak matches the
// anchor. Each level is monotone: BOL peak grows with E_oc, the EOL/BOL peak
// ratio grows with the Tafel term, the cell voltage grows with alpha_aux.
inline FuelCellParams calibrate_fc_params(const CalibrationTargets& tg,
                                          FuelCellParams base = FuelCellParams{},
                                          CalibrationReport* report = nullptr) {
    if (!(tg.p_max_bol_kw > 0 && tg.p_max_eol_kw > 0 && tg.v_cell_min_v > 0))
        throw std::invalid_argument("calibrate_fc_params: targets must be positive");
    if (tg.p_max_eol_kw >= tg.p_max_bol_kw)
        throw std::invalid_argument(
            "calibrate_fc_params: infeasible targets, EOL max must be below BOL max");

    auto solve_eoc = [&](FuelCellParams p) {
        double lo = p.n_s * p.e_ts_v * 1.0001, hi = 1e6;
        for (int k = 0; k < 90; ++k) {
            p.e_oc_v = 0.5 * (lo + hi);
            (fc_max_net_power(p, Aging::Bol) < tg.p_max_bol_kw ? lo : hi) = p.e_oc_v;
        }
        p.e_oc_v = 0.5 * (lo + hi);
        return p;
    };
    auto solve_ets = [&](FuelCellParams p) {
        double lo = 1e-4, hi = 3000.0 / p.n_s;
        for (int k = 0; k < 90; ++k) {
            p.e_ts_v = 0.5 * (lo + hi);
            const FuelCellParams q = solve_eoc(p);
            (fc_max_net_power(q, Aging::Eol) < tg.p_max_eol_kw ? lo : hi) = p.e_ts_v;
        }
        p.e_ts_v = 0.5 * (lo + hi);
        return solve_eoc(p);
    };

    FuelCellParams p = base;
    double lo = 0.0, hi = 0.99;
    for (int k = 0; k < 70; ++k) {
        p.alpha_aux = 0.5 * (lo + hi);
        const FuelCellParams q = solve_ets(p);
        double i_pk = 0.0;
        fc_max_net_power(q, Aging::Eol, &i_pk);
        const double v_cell = fc_voltage(i_pk, q, Aging::Eol) / q.n_s;
        (v_cell < tg.v_cell_min_v ? lo : hi) = p.alpha_aux;
    }
    p.alpha_aux = 0.5 * (lo + hi);
    p = solve_ets(p);

    double i_pk = 0.0;
    CalibrationReport rep;
    rep.resid_p_bol_kw = fc_max_net_power(p, Aging::Bol) - tg.p_max_bol_kw;
    rep.resid_p_eol_kw = fc_max_net_power(p, Aging::Eol, &i_pk) - tg.p_max_eol_kw;
    rep.resid_v_cell_v = fc_voltage(i_pk, p, Aging::Eol) / p.n_s - tg.v_cell_min_v;
    if (std::abs(rep.resid_p_bol_kw) > 5e-3 * tg.p_max_bol_kw ||
        std::abs(rep.resid_p_eol_kw) > 5e-3 * tg.p_max_eol_kw ||
        std::abs(rep.resid_v_cell_v) > 5e-3 * tg.v_cell_min_v)
        throw std::runtime_error("calibrate_fc_params: no solution in bracket, residuals " +
                                 std::to_string(rep.resid_p_bol_kw) + " kW / " +
                                 std::to_string(rep.resid_p_eol_kw) + " kW / " +
                                 std::to_string(rep.resid_v_cell_v) + " V");
    if (report) *report = rep;
    p.validate();
    return p;
}

// defaults calibrated to the printed power ratings; computed once
inline const FuelCellParams& calibrated_fc_defaults() {
    static const FuelCellParams p = calibrate_fc_params(CalibrationTargets{});
    return p;
}

// --- battery ------------------------------------------------------------------

enum class BatteryCurrentMode { Exact, Linear };

// battery current from terminal power (A); positive = discharge
inline double battery_current(double p_bat_kw, const BatteryParams& bat,
                              BatteryCurrentMode mode) {
    if (mode == BatteryCurrentMode::Linear) return 1000.0 * p_bat_kw / bat.e_oc_v;
    const double half = bat.e_oc_v / (2.0 * bat.r_i_ohm);
    const double disc = half * half - 1000.0 * p_bat_kw / bat.r_i_ohm;
    if (disc < 0)
        throw std::domain_error("battery_current: discharge power beyond source model limit");
    return half - std::sqrt(disc);
}

} // namespace hems::plant
