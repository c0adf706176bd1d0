#include <gtest/gtest.h>

#include <cmath>

#include "hems/sim.hpp"

using namespace hems;
using plant::Aging;

namespace {
sim::PlantSet plant_set() { return sim::PlantSet{}; }
}

TEST(RectMission, HeadlineCaseAndEdgeShapes) {
    const sim::MissionProfile m =
        sim::generate_rectangular_mission(1300.0, 3800.0, 1200.0, 600.0, 2700.0);
    EXPECT_DOUBLE_EQ(m.p_load_kw.front(), 1300.0);
    EXPECT_DOUBLE_EQ(m.p_load_kw[1200 / 5], 3800.0);
    EXPECT_DOUBLE_EQ(m.p_load_kw[1795 / 5], 3800.0);
    EXPECT_DOUBLE_EQ(m.p_load_kw[1800 / 5], 1300.0);
    // zero-length pulse -> constant
    const sim::MissionProfile c =
        sim::generate_rectangular_mission(900.0, 3800.0, 100.0, 0.0, 500.0);
    for (double p : c.p_load_kw) EXPECT_DOUBLE_EQ(p, 900.0);
    // pulse at t = 0
    const sim::MissionProfile z =
        sim::generate_rectangular_mission(900.0, 2000.0, 0.0, 50.0, 500.0);
    EXPECT_DOUBLE_EQ(z.p_load_kw.front(), 2000.0);
}

TEST(SyntheticMission, DeterministicForAFixedSeed) {
    const sim::MissionProfile a = sim::generate_synthetic_mission(77, 3600.0);
    const sim::MissionProfile b = sim::generate_synthetic_mission(77, 3600.0);
    ASSERT_EQ(a.p_load_kw.size(), b.p_load_kw.size());
    for (size_t i = 0; i < a.p_load_kw.size(); ++i)
        ASSERT_EQ(a.p_load_kw[i], b.p_load_kw[i]);
    const sim::MissionProfile d = sim::generate_synthetic_mission(78, 3600.0);
    bool differs = false;
    for (size_t i = 0; i < std::min(a.p_load_kw.size(), d.p_load_kw.size()); ++i)
        if (a.p_load_kw[i] != d.p_load_kw[i]) { differs = true; break; }
    EXPECT_TRUE(differs);
}

TEST(SyntheticMission, RegimeLevelsMatchTheAnchors) {
    // long-run sample: power clusters near the three regime levels
    const sim::MissionProfile m = sim::generate_synthetic_mission(5, 100.0 * 3600.0);
    double n_idle = 0, n_sail = 0, n_assist = 0;
    double s_idle = 0, s_sail = 0, s_assist = 0;
    for (double p : m.p_load_kw) {
        if (p < 260.0 * 2) {
            n_idle += 1;
            s_idle += p;
        } else if (p < 2500.0) {
            n_sail += 1;
            s_sail += p;
        } else {
            n_assist += 1;
            s_assist += p;
        }
    }
    ASSERT_GT(n_idle, 0);
    ASSERT_GT(n_sail, 0);
    ASSERT_GT(n_assist, 0);
    EXPECT_NEAR(s_idle / n_idle, 200.0, 0.05 * 200.0);
    EXPECT_NEAR(s_sail / n_sail, 1300.0, 0.05 * 1300.0);
    EXPECT_NEAR(s_assist / n_assist, 3800.0, 0.05 * 3800.0);
}

TEST(SyntheticMission, CovariatesTrackRegimePower) {
    const sim::MissionProfile m = sim::generate_synthetic_mission(6, 4.0 * 3600.0);
    ASSERT_TRUE(m.has_covariates());
    // mean speed and rpm in assist exceed sailing exceed idle
    double v_by_band[3] = {0, 0, 0}, n_by_band[3] = {0, 0, 0}, cnt[3] = {0, 0, 0};
    for (size_t i = 0; i < m.p_load_kw.size(); ++i) {
        const int band = m.p_load_kw[i] < 520.0 ? 0 : (m.p_load_kw[i] < 2500.0 ? 1 : 2);
        v_by_band[band] += m.v_kn[i];
        n_by_band[band] += m.n_prop_s_rpm[i];
        cnt[band] += 1;
    }
    ASSERT_GT(cnt[0], 0);
    ASSERT_GT(cnt[1], 0);
    ASSERT_GT(cnt[2], 0);
    EXPECT_LT(v_by_band[0] / cnt[0], v_by_band[1] / cnt[1]);
    EXPECT_LT(v_by_band[1] / cnt[1], v_by_band[2] / cnt[2]);
    EXPECT_LT(n_by_band[0] / cnt[0], n_by_band[1] / cnt[1]);
    EXPECT_LT(n_by_band[1] / cnt[1], n_by_band[2] / cnt[2]);
}

TEST(EnergyBursts, RectanglesAndEdgeCases) {
    const sim::MissionProfile m =
        sim::generate_rectangular_mission(1300.0, 3800.0, 1200.0, 600.0, 2700.0);
    // below threshold everywhere -> empty
    EXPECT_TRUE(sim::energy_bursts(m, 4000.0).empty());
    // one burst: (3800-3060) kW for 10 min = 123.33 kWh (5 s edges smear slightly)
    const std::vector<double> bursts = sim::energy_bursts(m, 3060.0);
    ASSERT_EQ(bursts.size(), 1u);
    EXPECT_NEAR(bursts[0], (3800.0 - 3060.0) * 600.0 / 3600.0, 1.0);
    // zero threshold integrates the whole mission energy
    const std::vector<double> all = sim::energy_bursts(m, 0.0);
    ASSERT_EQ(all.size(), 1u);
    double total = 0.0;
    for (double p : m.p_load_1s) total += p / 3600.0;
    EXPECT_NEAR(all[0], total, 1e-6 * total);
}

TEST(RunMission, ZeroLoadIdleAccumulatesOnlyBaseStaticRate) {
    sim::MissionProfile m;
    m.id = "idle";
    m.p_load_kw.assign(721, 0.0);  // one hour at 5 s
    m.build_1s();
    sim::SimConfig cfg;
    cfg.strategy = sim::Strategy::Filter;
    cfg.p_fc_init_kw = 0.0;
    const sim::SimResult r = sim::run_mission(m, cfg, plant_set());
    EXPECT_DOUBLE_EQ(r.h2_kg, 0.0);
    EXPECT_DOUBLE_EQ(r.deg_dynamic_uv, 0.0);
    const costs::DegradationParams deg;
    EXPECT_NEAR(r.deg_static_uv, deg.dv_lo * m.duration_s() / 3600.0, 1e-6);
}

TEST(RunMission, ConstantLoadHydrogenMatchesSteadyRate) {
    sim::MissionProfile m;
    m.id = "const";
    m.p_load_kw.assign(1.0 * 3600.0 / 5.0 + 1, 1300.0);
    m.build_1s();
    for (sim::Strategy s : {sim::Strategy::Filter, sim::Strategy::Ecms, sim::Strategy::Mpc}) {
        sim::SimConfig cfg;
        cfg.strategy = s;
        cfg.p_fc_init_kw = 1300.0;
        cfg.p_fc_ref_kw = 1300.0;  // optimization strategies hold the load
        const sim::PlantSet ps = plant_set();
        const sim::SimResult r = sim::run_mission(m, cfg, ps);
        const double rate =
            costs::h2_mass_rate(plant::fc_current_from_power(1300.0, ps.fc, Aging::Bol), ps.fc);
        const double expect = rate * m.duration_s() / 3600.0;
        EXPECT_NEAR(r.h2_kg, expect, 0.01 * expect) << sim::strategy_name(s);
    }
}

TEST(RunMission, PowerBalanceResidualIsZeroEverywhere) {
    const sim::MissionProfile m = sim::generate_synthetic_mission(12, 1800.0);
    sim::SimConfig cfg;
    cfg.strategy = sim::Strategy::Ecms;
    const sim::SimResult r = sim::run_mission(m, cfg, plant_set());
    for (size_t i = 0; i < r.t_s.size(); ++i) {
        const double resid = r.p_fc_kw[i] + r.p_bat_kw[i] - r.p_load_kw[i];
        ASSERT_LE(std::abs(resid), 1e-9);
    }
}

TEST(RunMission, SocTelescopingIdentityHolds) {
    const sim::MissionProfile m = sim::generate_synthetic_mission(13, 3600.0);
    sim::SimConfig cfg;
    cfg.strategy = sim::Strategy::Mpc;
    const sim::PlantSet ps = plant_set();
    const sim::SimResult r = sim::run_mission(m, cfg, ps);
    if (!r.violations.empty()) GTEST_SKIP() << "battery clamp engaged";
    double batt_kwh = 0.0;
    for (double pb : r.p_bat_kw) batt_kwh += pb / 3600.0;
    const double from_soc = (cfg.xi_init - r.final_soc) * ps.bat.energy_kwh();
    EXPECT_NEAR(batt_kwh, from_soc, 1e-12 * std::max(1.0, std::abs(batt_kwh)));
}

TEST(RunMission, AccumulatorsAreMonotone) {
    const sim::MissionProfile m = sim::generate_synthetic_mission(14, 1200.0);
    sim::SimConfig cfg;
    cfg.strategy = sim::Strategy::Filter;
    cfg.filter.tau_fd_s = 60.0;
    // spot check: rates are non-negative, so partial sums are monotone; assert
    // final accumulators positive and consistent
    const sim::SimResult r = sim::run_mission(m, cfg, plant_set());
    EXPECT_GT(r.h2_kg, 0.0);
    EXPECT_GT(r.deg_static_uv, 0.0);
    EXPECT_GE(r.deg_dynamic_uv, 0.0);
}

TEST(RunMission, DeterministicRerunsMatchBitForBit) {
    const sim::MissionProfile m = sim::generate_synthetic_mission(15, 1800.0);
    sim::SimConfig cfg;
    cfg.strategy = sim::Strategy::Mpc;
    const sim::PlantSet ps = plant_set();
    const sim::SimResult a = sim::run_mission(m, cfg, ps);
    const sim::SimResult b = sim::run_mission(m, cfg, ps);
    ASSERT_EQ(a.p_fc_kw.size(), b.p_fc_kw.size());
    for (size_t i = 0; i < a.p_fc_kw.size(); ++i) {
        ASSERT_EQ(a.p_fc_kw[i], b.p_fc_kw[i]);
        ASSERT_EQ(a.soc[i], b.soc[i]);
    }
    EXPECT_EQ(a.h2_kg, b.h2_kg);
    EXPECT_EQ(a.deg_static_uv, b.deg_static_uv);
    EXPECT_EQ(a.deg_dynamic_uv, b.deg_dynamic_uv);
}

TEST(Sweep, SingleMissionMatchesRunMission) {
    const sim::MissionProfile m = sim::generate_synthetic_mission(16, 1800.0);
    sim::SimConfig cfg;
    cfg.strategy = sim::Strategy::Ecms;
    const sim::PlantSet ps = plant_set();
    const sim::SimResult direct = sim::run_mission(m, cfg, ps);
    const sim::SweepResult sr = sim::sweep({m}, {{"ecms", cfg}}, {Aging::Bol}, ps, 1);
    ASSERT_EQ(sr.rows.size(), 1u);
    EXPECT_EQ(sr.rows[0].error, "");
    EXPECT_DOUBLE_EQ(sr.totals[0].h2_kg, direct.h2_kg);
    EXPECT_DOUBLE_EQ(sr.totals[0].deg_uv, direct.deg_total_uv());
}

TEST(Sweep, TwoIdenticalMissionsDoubleTheTotals) {
    const sim::MissionProfile m = sim::generate_synthetic_mission(17, 1200.0);
    sim::SimConfig cfg;
    cfg.strategy = sim::Strategy::Filter;
    const sim::PlantSet ps = plant_set();
    sim::MissionProfile m2 = m;
    m2.id = "copy";
    const sim::SweepResult sr = sim::sweep({m, m2}, {{"filter", cfg}}, {Aging::Bol}, ps, 2);
    const sim::SimResult direct = sim::run_mission(m, cfg, ps);
    EXPECT_NEAR(sr.totals[0].h2_kg, 2.0 * direct.h2_kg, 1e-12);
    EXPECT_NEAR(sr.totals[0].deg_uv, 2.0 * direct.deg_total_uv(), 1e-12);
}

TEST(Sweep, MissionFailureIsRecordedAndTheSweepContinues) {
    const sim::MissionProfile good = sim::generate_synthetic_mission(18, 600.0);
    sim::MissionProfile bad;  // empty profile -> run_mission throws
    bad.id = "bad";
    bad.p_load_kw = {1.0};
    bad.p_load_1s = {};  // deliberately inconsistent
    sim::SimConfig cfg;
    cfg.strategy = sim::Strategy::Filter;
    const sim::SweepResult sr =
        sim::sweep({bad, good}, {{"filter", cfg}}, {Aging::Bol}, plant_set(), 1);
    EXPECT_EQ(sr.totals[0].failures, 1);
    EXPECT_GT(sr.totals[0].h2_kg, 0.0);
}

TEST(HorizonSweep, FirstColumnEqualsTheStandardMpcRun) {
    const sim::MissionProfile m = sim::generate_synthetic_mission(19, 1800.0);
    sim::SimConfig cfg;
    cfg.strategy = sim::Strategy::Mpc;
    const sim::PlantSet ps = plant_set();
    const auto pts = sim::horizon_sweep({m}, {15.0}, cfg, ps, 1);
    ASSERT_EQ(pts.size(), 1u);
    sim::SimConfig direct_cfg = cfg;
    direct_cfg.n_mpc = 30;
    const sim::SimResult direct = sim::run_mission(m, direct_cfg, ps);
    EXPECT_DOUBLE_EQ(pts[0].deg_uv, direct.deg_total_uv());
    EXPECT_DOUBLE_EQ(pts[0].h2_kg, direct.h2_kg);
}

TEST(HorizonSweep, RejectsOffGridHorizon) {
    const sim::MissionProfile m = sim::generate_synthetic_mission(20, 600.0);
    sim::SimConfig cfg;
    EXPECT_THROW(sim::horizon_sweep({m}, {7.7}, cfg, plant_set(), 1), std::invalid_argument);
}
