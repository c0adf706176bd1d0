#pragma once

// Hydrogen-consumption and degradation models, their convex quadratic
// approximations for the optimization-based controllers, and the euro
// aggregation. The simulator integrates the piecewise/true models; only the
// controllers see the quadratic fits.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hems/plant.hpp"

namespace hems::costs {

using plant::Aging;

constexpr double kMolarMassH2 = 2.016e-3;  // kg/mol
constexpr double kFaraday = 96485.0;       // C/mol

struct DegradationParams {
    double p_lo = 0.2;          // region thresholds, fraction of P_fc_max
    double p_hi = 0.8;
    double dv_lo = 8.6;         // static rates (uV/h)
    double dv_hi = 10.0;
    double dv_base = 2.0;
    double dv_dyn = 9.5;        // per full one-way power swing (uV)
    double dt_dyn = 10.0;       // reference ramp time (s)
    double w_blend = 0.08;      // linear blend half-width, fraction of P_fc_max

    void validate() const {
        if (!(0 < p_lo && p_lo < p_hi && p_hi < 1))
            throw std::invalid_argument("DegradationParams: need 0 < p_lo < p_hi < 1");
        if (dv_lo < 0 || dv_hi < 0 || dv_base < 0 || dv_dyn < 0 || dt_dyn <= 0 || w_blend <= 0)
            throw std::invalid_argument("DegradationParams: rates must be non-negative");
        if (dv_lo < dv_base || dv_hi < dv_base)
            throw std::invalid_argument("DegradationParams: region rates must be >= base");
    }

    // quadratic coefficient of the gradient law, uV*s/kW^2
    double dv_dyn2(double p_fc_max_kw) const {
        return dt_dyn * dv_dyn / (p_fc_max_kw * p_fc_max_kw);
    }
};

struct CostParams {
    double c_h2_eur_kg = 8.0;
    double c_fc_capex_eur_kw = 1500.0;
    double r_fc_stack = 0.5;    // stack share of system capex
    double r_eol = 0.1;         // power loss fraction defining end of life
    double v_fc_min_v = 676.5;  // total stack voltage at rated current (EOL)
    double n_s = 1100.0;        // series cell count

    void validate() const {
        if (c_h2_eur_kg <= 0 || c_fc_capex_eur_kw <= 0 || r_fc_stack < 0 || r_eol <= 0 ||
            v_fc_min_v <= 0 || n_s <= 0)
            throw std::invalid_argument("CostParams: invalid field");
    }
};

// stack hydrogen mass flow (kg/h), Faraday law plus crossover loss
inline double h2_mass_rate(double i_fc_a, const plant::FuelCellParams& fc) {
    if (i_fc_a < 0) throw std::domain_error("h2_mass_rate: negative current");
    return 3600.0 * fc.n_s * i_fc_a * kMolarMassH2 / (2.0 * kFaraday) * (1.0 + fc.beta_xover);
}

// static degradation rate (uV/h), piecewise with linear blend bands
inline double static_degradation_rate(double p_fc_kw, double p_fc_max_kw,
                                      const DegradationParams& d) {
    if (p_fc_kw < -1e-9 || p_fc_kw > p_fc_max_kw * (1.0 + 1e-9))
        throw std::domain_error("static_degradation_rate: power outside [0, P_fc_max]");
    const double x = std::clamp(p_fc_kw / p_fc_max_kw, 0.0, 1.0);
    const double w = d.w_blend;
    if (x <= d.p_lo - w) return d.dv_lo;
    if (x < d.p_lo + w)
        return d.dv_lo + (d.dv_base - d.dv_lo) * (x - (d.p_lo - w)) / (2.0 * w);
    if (x <= d.p_hi - w) return d.dv_base;
    if (x < d.p_hi + w)
        return d.dv_base + (d.dv_hi - d.dv_base) * (x - (d.p_hi - w)) / (2.0 * w);
    return d.dv_hi;
}

// dynamic degradation rate (uV/h); quadratic and even in the power gradient
inline double dynamic_degradation_rate(double pdot_fc_kw_s, double p_fc_max_kw,
                                       const DegradationParams& d) {
    return 3600.0 * d.dv_dyn2(p_fc_max_kw) * pdot_fc_kw_s * pdot_fc_kw_s;
}

struct QuadraticCurve {
    double a = 0.0, b = 0.0, c = 0.0;   // a*p^2 + b*p + c

    double eval(double p) const { return (a * p + b) * p + c; }
    double marginal(double p) const { return 2.0 * a * p + b; }
};

// least squares subject to a >= 0; refits linear when convexity binds
inline QuadraticCurve fit_convex_quadratic(const std::vector<double>& p,
                                           const std::vector<double>& y) {
    if (p.size() != y.size()) throw std::invalid_argument("fit: size mismatch");
    std::vector<double> dist = p;
    std::sort(dist.begin(), dist.end());
    dist.erase(std::unique(dist.begin(), dist.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               dist.end());
    if (dist.size() < 3)
        throw std::invalid_argument("fit_convex_quadratic: need >= 3 distinct abscissae");

    const Eigen::Index n = static_cast<Eigen::Index>(p.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = p[i] * p[i];
        A(i, 1) = p[i];
        A(i, 2) = 1.0;
        rhs(i) = y[i];
    }
    Eigen::Vector3d sol = A.colPivHouseholderQr().solve(rhs);
    QuadraticCurve q{sol(0), sol(1), sol(2)};
    if (q.a < 0) {
        Eigen::MatrixXd Al = A.rightCols(2);
        Eigen::Vector2d sl = Al.colPivHouseholderQr().solve(rhs);
        q = QuadraticCurve{0.0, sl(0), sl(1)};
    }
    return q;
}

// c_deg (eur/uV): partial stack replacement cost per volt of degradation
inline double degradation_cost_constant(const CostParams& c, double p_fc_max_kw) {
    c.validate();
    const double eur_per_volt =
        c.r_fc_stack * c.c_fc_capex_eur_kw * p_fc_max_kw * c.n_s / (c.r_eol * c.v_fc_min_v);
    return eur_per_volt * 1e-6;
}

struct StaticCostModel {
    QuadraticCurve h2_fit;      // kg/h vs kW
    QuadraticCurve deg_fit;     // uV/h vs kW
    QuadraticCurve total;       // eur/h vs kW
    Aging aging = Aging::Bol;
    double p_fc_max_kw = 0.0;
    double c_deg_eur_uv = 0.0;

    double marginal(double p_kw) const { return total.marginal(p_kw); }
};

inline StaticCostModel build_static_cost_model(const plant::FuelCellParams& fc,
                                               const plant::OperatingLimits& lim,
                                               const DegradationParams& d,
                                               const CostParams& c, Aging aging) {
    const double pmax = lim.p_fc_max(aging);
    constexpr int kGrid = 101;
    std::vector<double> ps(kGrid), h2(kGrid), dg(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        const double p = pmax * i / (kGrid - 1);
        ps[i] = p;
        h2[i] = p > 0 ? h2_mass_rate(plant::fc_current_from_power(p, fc, aging), fc) : 0.0;
        dg[i] = static_degradation_rate(p, pmax, d);
    }
    StaticCostModel m;
    m.h2_fit = fit_convex_quadratic(ps, h2);
    m.deg_fit = fit_convex_quadratic(ps, dg);
    m.aging = aging;
    m.p_fc_max_kw = pmax;
    m.c_deg_eur_uv = degradation_cost_constant(c, lim.p_fc_max(Aging::Bol));
    m.total.a = c.c_h2_eur_kg * m.h2_fit.a + m.c_deg_eur_uv * m.deg_fit.a;
    m.total.b = c.c_h2_eur_kg * m.h2_fit.b + m.c_deg_eur_uv * m.deg_fit.b;
    m.total.c = c.c_h2_eur_kg * m.h2_fit.c + m.c_deg_eur_uv * m.deg_fit.c;
    return m;
}

} // namespace hems::costs
