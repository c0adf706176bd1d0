#include <gtest/gtest.h>

#include <cmath>

#include "hems/plant.hpp"
#include "hems/sim.hpp"

using namespace hems;
using plant::Aging;

namespace {
const plant::FuelCellParams& cal() { return plant::calibrated_fc_defaults(); }
}

TEST(FcVoltage, LogTermVanishesAtUnitArgument) {
    const plant::FuelCellParams& fc = cal();
    const double i = fc.n_s * fc.i_0_a;
    EXPECT_NEAR(plant::fc_voltage(i, fc, Aging::Bol), fc.e_oc_v - fc.r_i_bol_ohm * i, 1e-9);
}

TEST(FcVoltage, EolBolDifferenceIsResistiveOnly) {
    const plant::FuelCellParams& fc = cal();
    for (double i : {500.0, 2000.0, 8000.0}) {
        const double dv = plant::fc_voltage(i, fc, Aging::Bol) -
                          plant::fc_voltage(i, fc, Aging::Eol);
        EXPECT_NEAR(dv, (0.0280 - 0.0232) * i, 1e-8);
    }
}

TEST(FcVoltage, StrictlyDecreasingOnDenseGrid) {
    const plant::FuelCellParams& fc = cal();
    double i_pk = 0.0;
    plant::fc_max_net_power(fc, Aging::Bol, &i_pk);
    double prev = plant::fc_voltage(i_pk * 1e-4, fc, Aging::Bol);
    for (int k = 1; k <= 2000; ++k) {
        const double i = i_pk * 1e-4 + (i_pk - i_pk * 1e-4) * k / 2000.0;
        const double v = plant::fc_voltage(i, fc, Aging::Bol);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(FcVoltage, RejectsNonpositiveCurrent) {
    EXPECT_THROW(plant::fc_voltage(0.0, cal(), Aging::Bol), std::domain_error);
    EXPECT_THROW(plant::fc_voltage(-5.0, cal(), Aging::Bol), std::domain_error);
}

TEST(FcVoltage, LaggedModeConvergesToSteady) {
    const plant::FuelCellParams& fc = cal();
    plant::FcVoltageFilter filt;
    const double v0 = filt.step(2000.0, fc, Aging::Bol, 1.0);
    EXPECT_NEAR(v0, plant::fc_voltage(2000.0, fc, Aging::Bol), 1e-12);
    // step the current; the activation term approaches the new steady value
    double v = 0.0;
    for (int k = 0; k < 50; ++k) v = filt.step(4000.0, fc, Aging::Bol, 1.0);
    EXPECT_NEAR(v, plant::fc_voltage(4000.0, fc, Aging::Bol), 1e-6);
    // intermediate sample sits between the old and new voltage at this current
    plant::FcVoltageFilter f2;
    f2.step(2000.0, fc, Aging::Bol, 1.0);
    const double mid = f2.step(4000.0, fc, Aging::Bol, fc.t_d_s / 3.0);
    EXPECT_GT(mid, plant::fc_voltage(4000.0, fc, Aging::Bol));
}

TEST(FcNetPower, VanishesAtZeroCurrentLimit) {
    const plant::FuelCellParams& fc = cal();
    EXPECT_LT(plant::fc_net_power(1e-6, fc, Aging::Bol), 1e-2);
}

TEST(FcNetPower, CalibratedPeaksMatchRatings) {
    const plant::FuelCellParams& fc = cal();
    EXPECT_NEAR(plant::fc_max_net_power(fc, Aging::Bol), 4150.0, 0.005 * 4150.0);
    EXPECT_NEAR(plant::fc_max_net_power(fc, Aging::Eol), 3735.0, 0.005 * 3735.0);
}

TEST(FcNetPower, UnimodalOnTestedRange) {
    const plant::FuelCellParams& fc = cal();
    double i_pk = 0.0;
    plant::fc_max_net_power(fc, Aging::Bol, &i_pk);
    // rises on the ascending branch, falls after the peak
    double prev = plant::fc_net_power(i_pk * 1e-3, fc, Aging::Bol);
    int sign_changes = 0;
    int dir = 1;
    for (int k = 1; k <= 1000; ++k) {
        const double i = i_pk * 1e-3 + (1.6 * i_pk - i_pk * 1e-3) * k / 1000.0;
        const double p = plant::fc_net_power(i, fc, Aging::Bol);
        const int d = p > prev ? 1 : -1;
        if (d != dir) {
            ++sign_changes;
            dir = d;
        }
        prev = p;
    }
    EXPECT_EQ(sign_changes, 1);
}

TEST(FcCurrentFromPower, RoundTripsAcrossTheRange) {
    const plant::FuelCellParams& fc = cal();
    for (int k = 1; k <= 100; ++k) {
        const double p = 4150.0 * k / 100.0;
        const double i = plant::fc_current_from_power(p, fc, Aging::Bol);
        EXPECT_NEAR(plant::fc_net_power(i, fc, Aging::Bol), p, 1e-6 * p);
    }
}

TEST(FcCurrentFromPower, BoundaryAndLimitBehavior) {
    const plant::FuelCellParams& fc = cal();
    double i_pk = 0.0;
    const double p_pk = plant::fc_max_net_power(fc, Aging::Bol, &i_pk);
    EXPECT_NEAR(plant::fc_current_from_power(p_pk, fc, Aging::Bol), i_pk, 1e-3 * i_pk);
    EXPECT_LT(plant::fc_current_from_power(1e-6, fc, Aging::Bol), 1.0);
    EXPECT_THROW(plant::fc_current_from_power(p_pk * 1.01, fc, Aging::Bol),
                 std::domain_error);
}

TEST(Calibration, HitsAllThreeTargets) {
    plant::CalibrationReport rep;
    const plant::FuelCellParams fc =
        plant::calibrate_fc_params(plant::CalibrationTargets{}, plant::FuelCellParams{}, &rep);
    EXPECT_NEAR(plant::fc_max_net_power(fc, Aging::Bol), 4150.0, 0.005 * 4150.0);
    EXPECT_NEAR(plant::fc_max_net_power(fc, Aging::Eol), 3735.0, 0.005 * 3735.0);
    double i_pk = 0.0;
    plant::fc_max_net_power(fc, Aging::Eol, &i_pk);
    EXPECT_NEAR(plant::fc_voltage(i_pk, fc, Aging::Eol) / fc.n_s, 0.615, 0.005 * 0.615);
}

TEST(Calibration, Idempotent) {
    const plant::FuelCellParams a = plant::calibrate_fc_params(plant::CalibrationTargets{});
    const plant::FuelCellParams b = plant::calibrate_fc_params(plant::CalibrationTargets{}, a);
    EXPECT_NEAR(a.e_oc_v, b.e_oc_v, 1e-9 * a.e_oc_v);
    EXPECT_NEAR(a.e_ts_v, b.e_ts_v, 1e-9 * a.e_ts_v);
    EXPECT_NEAR(a.alpha_aux, b.alpha_aux, 1e-9);
}

TEST(Calibration, RejectsInfeasibleTargets) {
    plant::CalibrationTargets tg;
    tg.p_max_eol_kw = tg.p_max_bol_kw * 1.1;
    EXPECT_THROW(plant::calibrate_fc_params(tg), std::invalid_argument);
}

TEST(BatteryCurrent, ZeroAtNoLoad) {
    const plant::BatteryParams bat;
    EXPECT_DOUBLE_EQ(plant::battery_current(0.0, bat, plant::BatteryCurrentMode::Exact), 0.0);
    EXPECT_DOUBLE_EQ(plant::battery_current(0.0, bat, plant::BatteryCurrentMode::Linear), 0.0);
}

TEST(BatteryCurrent, LinearModelMatchesHandValue) {
    plant::BatteryParams bat;
    bat.e_oc_v = 400.0;
    EXPECT_NEAR(plant::battery_current(400.0, bat, plant::BatteryCurrentMode::Linear), 1000.0,
                1e-12);
}

TEST(BatteryCurrent, LinearWithinOnePercentOfExactInTheSmallCurrentRegime) {
    const plant::BatteryParams bat;
    // premise: i*R << E_oc; scan currents up to 0.01*E_oc/R
    const double i_cap = 0.01 * bat.e_oc_v / bat.r_i_ohm;
    for (int k = 1; k <= 200; ++k) {
        const double i_target = i_cap * k / 200.0;
        // terminal power at this exact current (discharge)
        const double p_kw = (bat.e_oc_v - bat.r_i_ohm * i_target) * i_target / 1000.0;
        const double i_exact = plant::battery_current(p_kw, bat, plant::BatteryCurrentMode::Exact);
        const double i_lin = plant::battery_current(p_kw, bat, plant::BatteryCurrentMode::Linear);
        EXPECT_LE(std::abs(i_exact - i_lin) / i_exact, 0.01 + 1e-12);
    }
}

TEST(BatteryCurrent, RejectsInfeasibleDischarge) {
    const plant::BatteryParams bat;
    EXPECT_THROW(plant::battery_current(bat.discharge_limit_kw() * 1.01, bat,
                                        plant::BatteryCurrentMode::Exact),
                 std::domain_error);
}

TEST(StateSpace, MatricesMatchHandExpandedEntries) {
    const plant::BatteryParams bat;
    const plant::StateSpaceModel m(bat, 1.0);
    const double a21 = 1000.0 * 1.0 / (bat.e_oc_v * bat.c_bat_ah * 3600.0);
    EXPECT_DOUBLE_EQ(m.a(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(m.a(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(m.a(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(m.a(1, 0), a21);
    EXPECT_DOUBLE_EQ(m.b(0), 1.0);
    EXPECT_DOUBLE_EQ(m.b(1), a21 * 1.0 / 2.0);
    EXPECT_DOUBLE_EQ(m.b_d(0), 0.0);
    EXPECT_DOUBLE_EQ(m.b_d(1), -a21);
}

TEST(StateSpace, BalancedSystemIsStationary) {
    const plant::BatteryParams bat;
    const plant::StateSpaceModel m(bat, 1.0);
    const plant::SystemState x{1500.0, 0.5};
    const plant::SystemState y = plant::step_state(x, 0.0, 1500.0, m);
    EXPECT_DOUBLE_EQ(y.p_fc_kw, 1500.0);
    EXPECT_DOUBLE_EQ(y.soc, 0.5);
}

TEST(StateSpace, DischargeLowersSocByHandValue) {
    const plant::BatteryParams bat;
    const plant::StateSpaceModel m(bat, 1.0);
    const plant::SystemState x{1500.0, 0.5};
    const double d = 2500.0;
    const plant::SystemState y = plant::step_state(x, 0.0, d, m);
    const double expected_drop = (d - x.p_fc_kw) * 1.0 * 1000.0 /
                                 (bat.e_oc_v * bat.c_bat_ah * 3600.0);
    EXPECT_NEAR(x.soc - y.soc, expected_drop, 1e-15);
}

TEST(StateSpace, SocTelescopesOverRandomTrajectories) {
    const plant::BatteryParams bat;
    const plant::StateSpaceModel m(bat, 1.0);
    sim::Rng rng(7);
    plant::SystemState x{1000.0, 0.5};
    double energy_kwh = 0.0;  // sum of battery power over the trajectory
    for (int k = 0; k < 10000; ++k) {
        const double u = 40.0 * (rng.uniform() - 0.5);
        const double d = 500.0 + 3000.0 * rng.uniform();
        energy_kwh += plant::battery_power_kw(x.p_fc_kw, u, d, 1.0) / 3600.0;
        x = plant::step_state(x, u, d, m);
    }
    const double from_soc = (0.5 - x.soc) * bat.energy_kwh();
    EXPECT_NEAR(energy_kwh, from_soc, 1e-12 * std::max(1.0, std::abs(energy_kwh)));
}

TEST(Params, InvariantsRejectBadValues) {
    plant::FuelCellParams fc = cal();
    fc.alpha_aux = 1.0;
    EXPECT_THROW(fc.validate(), std::invalid_argument);
    plant::BatteryParams bat;
    bat.i_max_a = 1e9;  // beyond the source-model discharge limit
    EXPECT_THROW(bat.validate(), std::invalid_argument);
    plant::OperatingLimits lim;
    lim.soc_min = 0.9;
    EXPECT_THROW(lim.validate(), std::invalid_argument);
}
