#pragma once

// The three energy-management strategies: filter benchmark, ECMS instantaneous
// optimization, and receding-horizon MPC on top of the QP solver.
//
// Controllers work on the quadratic cost fits and the linear battery model.
// Stage cost and battery power are evaluated at end-of-step power
// p_fc + u*T, which makes the ECMS stationary point sit exactly at
// marginal(p_fc) = lambda and makes the one-step MPC coincide with ECMS.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hems/costs.hpp"
#include "hems/plant.hpp"
#include "hems/qp.hpp"

namespace hems::ems {

using costs::StaticCostModel;
using plant::Aging;
using plant::BatteryParams;
using plant::OperatingLimits;
using plant::SystemState;

// battery ohmic loss (kW) under the linear current model, p_bat in kW
inline double battery_loss_kw(double p_bat_kw, const BatteryParams& bat) {
    return 1000.0 * bat.r_i_ohm * p_bat_kw * p_bat_kw / (bat.e_oc_v * bat.e_oc_v);
}

struct ControlDecision {
    double pdot_fc_kw_s = 0.0;
    std::vector<double> planned_p_fc;   // MPC only
    double objective = 0.0;
    bool emergency = false;             // power balance kept, SoC soft-violated
    bool soc_softened = false;          // MPC slack active
    bool solver_fallback = false;       // MPC fell back to the ECMS step
};

// --- filter benchmark ----------------------------------------------------------

struct FilterConfig {
    double tau_fd_s = 600.0;    // frequency decoupling time constant
    double k_soc_kw = 2000.0;   // kW per unit SoC deviation
    double xi_ref = 0.5;

    void validate() const {
        if (tau_fd_s <= 0 || k_soc_kw < 0)
            throw std::invalid_argument("FilterConfig: tau_fd > 0, k_soc >= 0 required");
    }
};

class FilterController {
  public:
    explicit FilterController(FilterConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    ControlDecision step(const SystemState& x, double p_load_kw, double t_s,
                         const OperatingLimits& lim, Aging aging) {
        if (!primed_) {
            lpf_kw_ = p_load_kw;
            primed_ = true;
        } else {
            lpf_kw_ += (1.0 - std::exp(-t_s / cfg_.tau_fd_s)) * (p_load_kw - lpf_kw_);
        }
        const double target = lpf_kw_ + cfg_.k_soc_kw * (cfg_.xi_ref - x.soc);
        ControlDecision dec;
        double u = std::clamp((target - x.p_fc_kw) / t_s, -lim.pdot_fc_max_kw_s,
                              lim.pdot_fc_max_kw_s);
        u = std::clamp(u, (0.0 - x.p_fc_kw) / t_s, (lim.p_fc_max(aging) - x.p_fc_kw) / t_s);
        dec.pdot_fc_kw_s = u;
        return dec;
    }

    void reset() { primed_ = false; }

  private:
    FilterConfig cfg_;
    double lpf_kw_ = 0.0;
    bool primed_ = false;
};

// --- equivalent cost of stored energy -------------------------------------------

struct LambdaCurve {
    double c3 = 0, c2 = 0, c1 = 0, c0 = 0;    // eur/kWh as cubic in SoC

    double eval(double xi) const { return ((c3 * xi + c2) * xi + c1) * xi + c0; }
    double deriv(double xi) const { return (3.0 * c3 * xi + 2.0 * c2) * xi + c1; }
};

// unique cubic with lam(xi_min)=marginal(P_max), lam(xi_max)=marginal(0),
// lam(xi_ref)=marginal(P_ref), lam'(xi_ref)=0
inline LambdaCurve build_lambda(const StaticCostModel& model, const OperatingLimits& lim,
                                double xi_ref, double p_fc_ref_kw) {
    if (!(lim.soc_min < xi_ref && xi_ref < lim.soc_max))
        throw std::invalid_argument("build_lambda: xi_ref outside (soc_min, soc_max)");
    if (p_fc_ref_kw < 0 || p_fc_ref_kw > model.p_fc_max_kw)
        throw std::invalid_argument("build_lambda: P_fc_ref outside [0, P_fc_max]");
    Eigen::Matrix4d M;
    Eigen::Vector4d rhs;
    const double a = lim.soc_min, b = lim.soc_max, r = xi_ref;
    M << a * a * a, a * a, a, 1,
         b * b * b, b * b, b, 1,
         r * r * r, r * r, r, 1,
         3 * r * r, 2 * r, 1, 0;
    rhs << model.marginal(model.p_fc_max_kw), model.marginal(0.0),
           model.marginal(p_fc_ref_kw), 0.0;
    Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
    if (!lu.isInvertible())
        throw std::invalid_argument("build_lambda: degenerate anchor points");
    const Eigen::Vector4d c = lu.solve(rhs);
    return LambdaCurve{c(0), c(1), c(2), c(3)};
}

// --- ECMS -----------------------------------------------------------------------

struct EcmsConfig {
    LambdaCurve lambda;
    double mu = 0.0;            // dynamic cost coefficient (uV*s/kW^2); 0 -> default
    double xi_ref = 0.5;
    double p_fc_ref_kw = 0.0;   // anchoring point, recorded for reporting
    double t_ecms_s = 5.0;
    bool soc_adaptation = true;

    static double default_mu(const costs::DegradationParams& d, double p_fc_max_kw) {
        return 0.01 * d.dv_dyn2(p_fc_max_kw);
    }
};

inline ControlDecision ecms_step(const SystemState& x, double p_load_kw,
                                 const StaticCostModel& model, const EcmsConfig& cfg,
                                 const OperatingLimits& lim, const BatteryParams& bat) {
    const double T = cfg.t_ecms_s;
    const double pmax = model.p_fc_max_kw;
    const double lam = cfg.lambda.eval(
        cfg.soc_adaptation ? std::clamp(x.soc, lim.soc_min, lim.soc_max) : cfg.xi_ref);

    const double u_rate = lim.pdot_fc_max_kw_s;
    double u_min = std::max(-u_rate, (0.0 - x.p_fc_kw) / T);
    double u_max = std::min(u_rate, (pmax - x.p_fc_kw) / T);

    // SoC and battery-current windows through the end-of-step battery power
    const double k_xi = T / 3600.0 / bat.energy_kwh();
    const double base = p_load_kw - x.p_fc_kw;            // p_bat at u = 0
    double lo = std::max(u_min, (base - (x.soc - lim.soc_min) / k_xi) / T);
    double hi = std::min(u_max, (base - (x.soc - lim.soc_max) / k_xi) / T);
    const double p_bat_lim = bat.e_oc_v * bat.i_max_a / 1000.0;
    lo = std::max(lo, (base - p_bat_lim) / T);
    hi = std::min(hi, (base + p_bat_lim) / T);

    ControlDecision dec;
    if (lo > hi) {
        // emergency: honor power balance and FC limits, flag the SoC violation
        dec.emergency = true;
        dec.pdot_fc_kw_s = std::clamp(base / T, u_min, u_max);
        return dec;
    }

    const double a = model.total.a, b = model.total.b;
    const double kl = 1000.0 * bat.r_i_ohm / (bat.e_oc_v * bat.e_oc_v);
    const double c_mu = model.c_deg_eur_uv * 3600.0 * cfg.mu;
    const double q2 = a * T * T + lam * kl * T * T + c_mu;
    const double q1 =
        2.0 * a * T * x.p_fc_kw + b * T - lam * T - 2.0 * lam * kl * T * base;
    double u = q2 > 0 ? -q1 / (2.0 * q2) : (q1 > 0 ? lo : hi);
    u = std::clamp(u, lo, hi);
    dec.pdot_fc_kw_s = u;
    const double p_end = x.p_fc_kw + T * u;
    const double p_bat = base - T * u;
    dec.objective = model.total.eval(p_end) + lam * (p_bat + battery_loss_kw(p_bat, bat)) +
                    c_mu * u * u;
    return dec;
}

// --- MPC ------------------------------------------------------------------------

struct MpcConfig {
    int n_mpc = 30;
    double t_mpc_s = 30.0;
    bool include_battery_losses = true;
    bool soc_adaptation = true;
    bool terminal_value = true;
    LambdaCurve lambda;
    double xi_ref = 0.5;
    double p_fc_ref_kw = 0.0;        // recorded for reporting
    double dv_dyn2_uv_s_kw2 = 0.0;   // gradient-law coefficient for the stage cost
    double qp_tol = 1e-8;

    void validate() const {
        if (n_mpc < 1) throw std::invalid_argument("MpcConfig: n_mpc >= 1 required");
        if (t_mpc_s <= 0) throw std::invalid_argument("MpcConfig: t_mpc > 0 required");
    }
};

// averages a 5 s forecast onto the controller period; length floor(len/ratio)
inline std::vector<double> downsample_forecast(const std::vector<double>& f5s,
                                               double t_mpc_s, double source_period_s = 5.0) {
    const int ratio = static_cast<int>(std::lround(t_mpc_s / source_period_s));
    if (ratio < 1 || std::abs(ratio * source_period_s - t_mpc_s) > 1e-9)
        throw std::invalid_argument("downsample_forecast: period must divide the MPC step");
    std::vector<double> out;
    out.reserve(f5s.size() / static_cast<size_t>(ratio));
    for (size_t i = 0; i + static_cast<size_t>(ratio) <= f5s.size(); i += static_cast<size_t>(ratio)) {
        double s = 0;
        for (int j = 0; j < ratio; ++j) s += f5s[i + static_cast<size_t>(j)];
        out.push_back(s / ratio);
    }
    return out;
}

// condensed horizon problem over the input sequence u(0..N-1)
inline qp::QuadraticProgram mpc_build_qp(const SystemState& x,
                                         const std::vector<double>& load_forecast_kw,
                                         const StaticCostModel& model, const MpcConfig& cfg,
                                         double lambda_now, const OperatingLimits& lim,
                                         const BatteryParams& bat, bool soften_soc = false) {
    cfg.validate();
    const int N = cfg.n_mpc;
    if (static_cast<int>(load_forecast_kw.size()) < N)
        throw std::invalid_argument("mpc_build_qp: forecast shorter than the horizon");

    const double T = cfg.t_mpc_s;
    const double Th = T / 3600.0;
    const double pmax = model.p_fc_max_kw;
    const double a = model.total.a, b = model.total.b;

    Eigen::VectorXd dseq(N);
    for (int i = 0; i < N; ++i) dseq(i) = load_forecast_kw[static_cast<size_t>(i)];

    Eigen::MatrixXd TL = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j) TL(i, j) = T;

    const double k_xi = T / 3600.0 / bat.energy_kwh();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j) S(i, j) = 1.0;

    const int n_var = soften_soc ? N + 2 : N;   // optional slack pair (lo, hi)
    qp::QuadraticProgram qp;
    qp.H = Eigen::MatrixXd::Zero(n_var, n_var);
    qp.g = Eigen::VectorXd::Zero(n_var);

    const Eigen::MatrixXd TLtTL = TL.transpose() * TL;
    const Eigen::VectorXd TLt1 = TL.transpose() * Eigen::VectorXd::Ones(N);
    qp.H.topLeftCorner(N, N) = 2.0 * Th * a * TLtTL;
    qp.g.head(N) = Th * (2.0 * a * x.p_fc_kw + b) * TLt1;

    // dynamic degradation cost on the gradient, eur/h per (kW/s)^2
    const double w_u = model.c_deg_eur_uv * 3600.0 * cfg.dv_dyn2_uv_s_kw2;
    qp.H.diagonal().head(N).array() += 2.0 * Th * w_u;

    if (cfg.include_battery_losses) {
        const double kl = 1000.0 * bat.r_i_ohm / (bat.e_oc_v * bat.e_oc_v);
        const Eigen::VectorXd c0 = dseq.array() - x.p_fc_kw;
        qp.H.topLeftCorner(N, N) += 2.0 * Th * lambda_now * kl * TLtTL;
        qp.g.head(N) -= 2.0 * Th * lambda_now * kl * (TL.transpose() * c0);
    }
    if (cfg.terminal_value) {
        qp.g.head(N) -= lambda_now * bat.energy_kwh() * k_xi * TLt1;
    }

    qp.lb = Eigen::VectorXd::Constant(n_var, -lim.pdot_fc_max_kw_s);
    qp.ub = Eigen::VectorXd::Constant(n_var, lim.pdot_fc_max_kw_s);
    if (soften_soc) {
        qp.lb.tail(2).setZero();
        qp.ub.tail(2).setConstant(std::numeric_limits<double>::infinity());
    }

    // rows: p bounds then SoC bounds
    const Eigen::MatrixXd A_xi = k_xi * (S * TL);
    const Eigen::VectorXd soc_base =
        Eigen::VectorXd::Constant(N, x.soc) - k_xi * (S * (dseq.array() - x.p_fc_kw).matrix());
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(4 * N, n_var);
    Eigen::VectorXd d(4 * N);
    C.block(0, 0, N, N) = TL;
    d.segment(0, N).setConstant(pmax - x.p_fc_kw);
    C.block(N, 0, N, N) = -TL;
    d.segment(N, N).setConstant(x.p_fc_kw);
    C.block(2 * N, 0, N, N) = -A_xi;
    d.segment(2 * N, N) = soc_base.array() - lim.soc_min;
    C.block(3 * N, 0, N, N) = A_xi;
    d.segment(3 * N, N) = lim.soc_max - soc_base.array();
    if (soften_soc) {
        C.block(2 * N, N, N, 1).setConstant(-1.0);      // lower-SoC slack
        C.block(3 * N, N + 1, N, 1).setConstant(-1.0);  // upper-SoC slack
        const double rho = 100.0 * Th * N * std::abs(model.total.eval(pmax));
        qp.g(N) = rho;
        qp.g(N + 1) = rho;
    }
    qp.C = std::move(C);
    qp.d = std::move(d);
    return qp;
}

class MpcController {
  public:
    MpcController(MpcConfig cfg, const costs::DegradationParams& deg)
        : cfg_(cfg), deg_(deg) {
        cfg_.validate();
    }

    // resolves the gradient-law coefficient for the model the controller runs on
    static MpcConfig with_dyn_cost(MpcConfig cfg, const costs::DegradationParams& deg,
                                   double p_fc_max_kw) {
        cfg.dv_dyn2_uv_s_kw2 = deg.dv_dyn2(p_fc_max_kw);
        return cfg;
    }

    const MpcConfig& config() const { return cfg_; }

    // load_forecast_kw: per-MPC-step mean loads, length >= n_mpc
    ControlDecision step(const SystemState& x, const std::vector<double>& load_forecast_kw,
                         const StaticCostModel& model, const OperatingLimits& lim,
                         const BatteryParams& bat) {
        const double lam = cfg_.lambda.eval(
            cfg_.soc_adaptation ? std::clamp(x.soc, lim.soc_min, lim.soc_max) : cfg_.xi_ref);
        ControlDecision dec = try_solve(x, load_forecast_kw, model, lim, bat, lam, false);
        if (dec.solver_fallback) {
            ControlDecision soft = try_solve(x, load_forecast_kw, model, lim, bat, lam, true);
            if (!soft.solver_fallback) return soft;
            // last resort: ECMS step at the MPC period
            EcmsConfig ec;
            ec.lambda = cfg_.lambda;
            ec.mu = EcmsConfig::default_mu(deg_, model.p_fc_max_kw);
            ec.xi_ref = cfg_.xi_ref;
            ec.t_ecms_s = cfg_.t_mpc_s;
            ec.soc_adaptation = cfg_.soc_adaptation;
            ControlDecision fb =
                ecms_step(x, load_forecast_kw.empty() ? x.p_fc_kw : load_forecast_kw[0],
                          model, ec, lim, bat);
            fb.solver_fallback = true;
            return fb;
        }
        return dec;
    }

    void reset() { warm_.reset(); }

  private:
    ControlDecision try_solve(const SystemState& x, const std::vector<double>& fc,
                              const StaticCostModel& model, const OperatingLimits& lim,
                              const BatteryParams& bat, double lam, bool soften) {
        const int N = cfg_.n_mpc;
        if (cfg_.dv_dyn2_uv_s_kw2 <= 0)
            cfg_.dv_dyn2_uv_s_kw2 = deg_.dv_dyn2(model.p_fc_max_kw);
        qp::QuadraticProgram prob =
            mpc_build_qp(x, fc, model, cfg_, lam, lim, bat, soften);

        qp::QpSettings st;
        st.tol = cfg_.qp_tol;
        if (warm_ && warm_->size() == prob.n()) st.warm_start = *warm_;
        const qp::QpSolution sol = qp::solve_qp(prob, st);

        ControlDecision dec;
        if (sol.status != qp::QpStatus::Optimal) {
            dec.solver_fallback = true;
            return dec;
        }
        // shift for the next warm start
        Eigen::VectorXd w(prob.n());
        w.head(N - 1) = sol.z.segment(1, N - 1);
        w(N - 1) = sol.z(N - 1);
        if (soften) w.tail(2) = sol.z.tail(2);
        warm_ = w;

        dec.pdot_fc_kw_s = sol.z(0);
        dec.objective = sol.objective;
        dec.soc_softened = soften && sol.z.tail(2).lpNorm<Eigen::Infinity>() > 1e-9;
        dec.emergency = dec.soc_softened;
        dec.planned_p_fc.resize(static_cast<size_t>(N));
        double p = x.p_fc_kw;
        for (int i = 0; i < N; ++i) {
            p += cfg_.t_mpc_s * sol.z(i);
            dec.planned_p_fc[static_cast<size_t>(i)] = p;
        }
        // exact limit compliance for the applied input
        const double T = cfg_.t_mpc_s;
        dec.pdot_fc_kw_s = std::clamp(dec.pdot_fc_kw_s, -lim.pdot_fc_max_kw_s,
                                      lim.pdot_fc_max_kw_s);
        dec.pdot_fc_kw_s =
            std::clamp(dec.pdot_fc_kw_s, (0.0 - x.p_fc_kw) / T,
                       (model.p_fc_max_kw - x.p_fc_kw) / T);
        return dec;
    }

    MpcConfig cfg_;
    costs::DegradationParams deg_;
    std::optional<Eigen::VectorXd> warm_;
};

} // namespace hems::ems
