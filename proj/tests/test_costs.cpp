#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hems/costs.hpp"

using namespace hems;
using plant::Aging;

namespace {
costs::StaticCostModel model(Aging a) {
    return costs::build_static_cost_model(plant::calibrated_fc_defaults(),
                                          plant::OperatingLimits{}, costs::DegradationParams{},
                                          costs::CostParams{}, a);
}
}

TEST(H2MassRate, ZeroAtZeroCurrent) {
    EXPECT_DOUBLE_EQ(costs::h2_mass_rate(0.0, plant::calibrated_fc_defaults()), 0.0);
}

TEST(H2MassRate, FaradayArithmetic) {
    plant::FuelCellParams fc;
    fc.n_s = 1000.0;
    fc.beta_xover = 0.0;
    const double expect = 3600.0 * 1000.0 * 1000.0 * 2.016e-3 / (2.0 * 96485.0);
    EXPECT_NEAR(costs::h2_mass_rate(1000.0, fc), expect, 1e-9 * expect);
    EXPECT_NEAR(expect, 37.61, 0.01);
}

TEST(H2MassRate, CrossoverScalesLinearly) {
    plant::FuelCellParams fc;
    fc.beta_xover = 0.0;
    const double base = costs::h2_mass_rate(1234.0, fc);
    fc.beta_xover = 0.02;
    EXPECT_NEAR(costs::h2_mass_rate(1234.0, fc), 1.02 * base, 1e-12 * base);
}

TEST(StaticDegradation, TablePointChecks) {
    const costs::DegradationParams d;
    const double pmax = 4150.0;
    EXPECT_DOUBLE_EQ(costs::static_degradation_rate(0.50 * pmax, pmax, d), 2.0);
    EXPECT_DOUBLE_EQ(costs::static_degradation_rate(0.90 * pmax, pmax, d), 10.0);
    EXPECT_DOUBLE_EQ(costs::static_degradation_rate(0.10 * pmax, pmax, d), 8.6);
}

TEST(StaticDegradation, ContinuousEverywhere) {
    const costs::DegradationParams d;
    const double pmax = 4150.0;
    for (int n : {1000, 4000, 16000}) {
        double max_jump = 0.0;
        double prev = costs::static_degradation_rate(0.0, pmax, d);
        for (int k = 1; k <= n; ++k) {
            const double cur = costs::static_degradation_rate(pmax * k / n, pmax, d);
            max_jump = std::max(max_jump, std::abs(cur - prev));
            prev = cur;
        }
        // jumps shrink proportionally with the grid: no discontinuity
        const double slope_bound = (d.dv_lo - d.dv_base) / (2.0 * d.w_blend) / pmax;
        EXPECT_LE(max_jump, 1.5 * slope_bound * pmax / n);
    }
}

TEST(StaticDegradation, RejectsOutOfRangePower) {
    const costs::DegradationParams d;
    EXPECT_THROW(costs::static_degradation_rate(-1.0, 4150.0, d), std::domain_error);
    EXPECT_THROW(costs::static_degradation_rate(4200.0, 4150.0, d), std::domain_error);
}

TEST(DynamicDegradation, ZeroAtStaticOperation) {
    EXPECT_DOUBLE_EQ(costs::dynamic_degradation_rate(0.0, 4150.0, {}), 0.0);
}

TEST(DynamicDegradation, FullRampIntegralIsClosedForm) {
    const costs::DegradationParams d;
    const double pmax = 4150.0;
    // ramp 0 -> pmax over dt_dyn seconds at constant gradient
    const double u = pmax / d.dt_dyn;
    const double total_uv = costs::dynamic_degradation_rate(u, pmax, d) / 3600.0 * d.dt_dyn;
    EXPECT_NEAR(total_uv, 9.5, 1e-9);
}

TEST(DynamicDegradation, HalvingRampTimeDoublesTotal) {
    const costs::DegradationParams d;
    const double pmax = 4150.0;
    auto total = [&](double ramp_s) {
        const double u = pmax / ramp_s;
        return costs::dynamic_degradation_rate(u, pmax, d) / 3600.0 * ramp_s;
    };
    EXPECT_NEAR(total(5.0), 2.0 * total(10.0), 1e-9);
}

TEST(DynamicDegradation, EvenInGradient) {
    for (double u : {1.0, 17.5, 212.5})
        EXPECT_DOUBLE_EQ(costs::dynamic_degradation_rate(u, 4150.0, {}),
                         costs::dynamic_degradation_rate(-u, 4150.0, {}));
}

TEST(FitConvexQuadratic, RecoversExactQuadratic) {
    std::vector<double> p, y;
    for (int k = 0; k <= 20; ++k) {
        const double x = 100.0 * k;
        p.push_back(x);
        y.push_back(2.0 * x * x + 3.0 * x + 1.0);
    }
    const costs::QuadraticCurve q = costs::fit_convex_quadratic(p, y);
    EXPECT_NEAR(q.a, 2.0, 1e-9);
    EXPECT_NEAR(q.b, 3.0, 1e-7);
    EXPECT_NEAR(q.c, 1.0, 1e-5);
}

TEST(FitConvexQuadratic, ConcaveInputActivatesConstraint) {
    std::vector<double> p, y;
    for (int k = 0; k <= 20; ++k) {
        const double x = static_cast<double>(k);
        p.push_back(x);
        y.push_back(-x * x);
    }
    const costs::QuadraticCurve q = costs::fit_convex_quadratic(p, y);
    EXPECT_DOUBLE_EQ(q.a, 0.0);
    EXPECT_NEAR(q.b, -20.0, 1e-9);  // best linear fit of -x^2 on 0..20
}

TEST(FitConvexQuadratic, RejectsDegenerateAbscissae) {
    EXPECT_THROW(costs::fit_convex_quadratic({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}),
                 std::invalid_argument);
}

TEST(FitConvexQuadratic, DegradationFitResidualWithinBound) {
    const costs::DegradationParams d;
    const double pmax = 4150.0;
    std::vector<double> p, y;
    for (int k = 0; k <= 100; ++k) {
        p.push_back(pmax * k / 100.0);
        y.push_back(costs::static_degradation_rate(p.back(), pmax, d));
    }
    const costs::QuadraticCurve q = costs::fit_convex_quadratic(p, y);
    double resid = 0.0;
    for (size_t i = 0; i < p.size(); ++i)
        resid = std::max(resid, std::abs(q.eval(p[i]) - y[i]));
    EXPECT_LT(resid, 0.25 * d.dv_hi);
}

TEST(DegradationCostConstant, ReproducesHeadlineValue) {
    const costs::CostParams c;
    const double c_deg = costs::degradation_cost_constant(c, 4150.0);
    EXPECT_NEAR(c_deg, 50.6, 0.01 * 50.6);
}

TEST(DegradationCostConstant, Proportionalities) {
    costs::CostParams c;
    const double base = costs::degradation_cost_constant(c, 4150.0);
    c.r_eol = 0.2;
    EXPECT_NEAR(costs::degradation_cost_constant(c, 4150.0), base / 2.0, 1e-9);
    c.r_eol = 0.1;
    c.r_fc_stack = 0.0;
    EXPECT_DOUBLE_EQ(costs::degradation_cost_constant(c, 4150.0), 0.0);
}

TEST(StaticCostModel, TotalIsTheStatedLinearCombination) {
    const costs::StaticCostModel m = model(Aging::Bol);
    const costs::CostParams c;
    EXPECT_DOUBLE_EQ(m.total.c, c.c_h2_eur_kg * m.h2_fit.c + m.c_deg_eur_uv * m.deg_fit.c);
    EXPECT_DOUBLE_EQ(m.total.a, c.c_h2_eur_kg * m.h2_fit.a + m.c_deg_eur_uv * m.deg_fit.a);
    EXPECT_DOUBLE_EQ(m.total.eval(0.0), m.total.c);
}

TEST(StaticCostModel, EolH2CurveDominatesBolPointwise) {
    const plant::FuelCellParams& fc = plant::calibrated_fc_defaults();
    for (int k = 1; k <= 100; ++k) {
        const double p = 3735.0 * k / 100.0;
        const double h2_bol =
            costs::h2_mass_rate(plant::fc_current_from_power(p, fc, Aging::Bol), fc);
        const double h2_eol =
            costs::h2_mass_rate(plant::fc_current_from_power(p, fc, Aging::Eol), fc);
        EXPECT_GE(h2_eol, h2_bol);
    }
}

TEST(StaticCostModel, MarginalAffineAndIncreasing) {
    const costs::StaticCostModel m = model(Aging::Bol);
    EXPECT_GE(m.total.a, 0.0);
    EXPECT_GT(m.marginal(4150.0), m.marginal(0.0));
    // affine: second difference vanishes
    const double d1 = m.marginal(1000.0) - m.marginal(0.0);
    const double d2 = m.marginal(2000.0) - m.marginal(1000.0);
    EXPECT_NEAR(d1, d2, 1e-9);
}

TEST(StaticCostModel, EolCompressesTheDomain) {
    const costs::StaticCostModel bol = model(Aging::Bol);
    const costs::StaticCostModel eol = model(Aging::Eol);
    EXPECT_NEAR(eol.p_fc_max_kw, 0.9 * bol.p_fc_max_kw, 1e-9);
    // thresholds scale with P_fc_max: rate at the same fraction matches
    const costs::DegradationParams d;
    EXPECT_DOUBLE_EQ(costs::static_degradation_rate(0.5 * eol.p_fc_max_kw, eol.p_fc_max_kw, d),
                     costs::static_degradation_rate(0.5 * bol.p_fc_max_kw, bol.p_fc_max_kw, d));
}

TEST(CostParams, CdegConsistentWithItsFactors) {
    const costs::CostParams c;
    const double stored = costs::degradation_cost_constant(c, 4150.0);
    const double recomputed =
        c.r_fc_stack * c.c_fc_capex_eur_kw * 4150.0 * c.n_s / (c.r_eol * c.v_fc_min_v) * 1e-6;
    EXPECT_NEAR(stored, recomputed, 1e-9 * recomputed);
}
