#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "hems/qp.hpp"
#include "hems/sim.hpp"

using namespace hems;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

qp::QuadraticProgram make_qp(const MatrixXd& H, const VectorXd& g, const VectorXd& lb,
                             const VectorXd& ub, const MatrixXd& C, const VectorXd& d) {
    qp::QuadraticProgram p;
    p.H = H;
    p.g = g;
    p.lb = lb;
    p.ub = ub;
    p.C = C;
    p.d = d;
    return p;
}

qp::QuadraticProgram unconstrained(const MatrixXd& H, const VectorXd& g) {
    const Eigen::Index n = g.size();
    return make_qp(H, g, VectorXd::Constant(n, -kInf), VectorXd::Constant(n, kInf),
                   MatrixXd(0, n), VectorXd(0));
}

// independent oracle: enumerate every subset of the stacked constraints as a
// candidate active set, solve the equality-constrained KKT system, keep the
// best feasible candidate with non-negative multipliers
struct OracleResult {
    bool feasible = false;
    double objective = kInf;
    VectorXd z;
};

OracleResult enumerate_oracle(const qp::QuadraticProgram& p) {
    const Eigen::Index n = p.n();
    std::vector<VectorXd> rows;
    std::vector<double> rhs;
    for (Eigen::Index i = 0; i < p.m(); ++i) {
        rows.push_back(p.C.row(i).transpose());
        rhs.push_back(p.d(i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (p.ub(i) < kInf) {
            VectorXd e = VectorXd::Zero(n);
            e(i) = 1;
            rows.push_back(e);
            rhs.push_back(p.ub(i));
        }
        if (p.lb(i) > -kInf) {
            VectorXd e = VectorXd::Zero(n);
            e(i) = -1;
            rows.push_back(e);
            rhs.push_back(-p.lb(i));
        }
    }
    const size_t m = rows.size();
    OracleResult best;
    for (size_t mask = 0; mask < (size_t{1} << m); ++mask) {
        std::vector<size_t> act;
        for (size_t i = 0; i < m; ++i)
            if (mask & (size_t{1} << i)) act.push_back(i);
        if (act.size() > static_cast<size_t>(n)) continue;
        const Eigen::Index k = static_cast<Eigen::Index>(act.size());
        MatrixXd kkt = MatrixXd::Zero(n + k, n + k);
        kkt.topLeftCorner(n, n) = p.H;
        VectorXd b(n + k);
        b.head(n) = -p.g;
        for (Eigen::Index j = 0; j < k; ++j) {
            kkt.block(0, n + j, n, 1) = rows[act[static_cast<size_t>(j)]];
            kkt.block(n + j, 0, 1, n) = rows[act[static_cast<size_t>(j)]].transpose();
            b(n + j) = rhs[act[static_cast<size_t>(j)]];
        }
        Eigen::FullPivLU<MatrixXd> lu(kkt);
        if (!lu.isInvertible()) continue;
        const VectorXd sol = lu.solve(b);
        const VectorXd z = sol.head(n);
        const VectorXd mu = sol.tail(k);
        if ((mu.array() < -1e-9).any()) continue;
        bool feas = true;
        for (size_t i = 0; i < m; ++i)
            if (rows[i].dot(z) > rhs[i] + 1e-8) { feas = false; break; }
        if (!feas) continue;
        const double obj = 0.5 * z.dot(p.H * z) + p.g.dot(z);
        if (obj < best.objective) {
            best.feasible = true;
            best.objective = obj;
            best.z = z;
        }
    }
    return best;
}

} // namespace

TEST(SolveQp, UnconstrainedIdentity) {
    MatrixXd H = MatrixXd::Identity(2, 2);
    VectorXd g(2);
    g << -1, -1;
    const qp::QpSolution s = qp::solve_qp(unconstrained(H, g));
    EXPECT_EQ(s.status, qp::QpStatus::Optimal);
    EXPECT_NEAR(s.z(0), 1.0, 1e-9);
    EXPECT_NEAR(s.z(1), 1.0, 1e-9);
    EXPECT_NEAR(s.objective, -1.0, 1e-9);
}

TEST(SolveQp, ActiveUpperBoundClampsTheInteriorOptimum) {
    MatrixXd H(1, 1);
    H << 2;
    VectorXd g(1);
    g << -10;
    VectorXd lb(1), ub(1);
    lb << -kInf;
    ub << 2;
    const qp::QpSolution s = qp::solve_qp(make_qp(H, g, lb, ub, MatrixXd(0, 1), VectorXd(0)));
    EXPECT_EQ(s.status, qp::QpStatus::Optimal);
    EXPECT_NEAR(s.z(0), 2.0, 1e-9);
}

TEST(SolveQp, MatchesEnumerationOracleOnRandomProblems) {
    sim::Rng rng(42);
    int solved = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.range(0, 4));
        const int m = static_cast<int>(rng.range(0, 5));
        MatrixXd M(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) = rng.normal();
        MatrixXd H = M.transpose() * M;
        if (trial % 3 != 0) H += 0.3 * MatrixXd::Identity(n, n);
        VectorXd g(n), lb(n), ub(n);
        for (int i = 0; i < n; ++i) {
            g(i) = 2.0 * rng.normal();
            lb(i) = -1.0 - rng.uniform();
            ub(i) = 1.0 + rng.uniform();
        }
        MatrixXd C(m, n);
        VectorXd d(m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) C(i, j) = rng.normal();
            d(i) = 0.5 + rng.uniform();
        }
        const qp::QuadraticProgram p = make_qp(H, g, lb, ub, C, d);
        const OracleResult oracle = enumerate_oracle(p);
        const qp::QpSolution s = qp::solve_qp(p);
        if (!oracle.feasible) {
            EXPECT_EQ(s.status, qp::QpStatus::Infeasible) << "trial " << trial;
            continue;
        }
        ASSERT_EQ(s.status, qp::QpStatus::Optimal) << "trial " << trial;
        EXPECT_NEAR(s.objective, oracle.objective, 1e-6 * (1.0 + std::abs(oracle.objective)))
            << "trial " << trial;
        ++solved;
    }
    EXPECT_GT(solved, 150);
}

TEST(SolveQp, DetectsInfeasible) {
    MatrixXd H(1, 1);
    H << 2;
    VectorXd g(1);
    g << 0;
    VectorXd lb(1), ub(1);
    lb << 0;
    ub << 10;
    MatrixXd C(1, 1);
    C << 1;
    VectorXd d(1);
    d << -1;  // x <= -1 contradicts x >= 0
    const qp::QpSolution s = qp::solve_qp(make_qp(H, g, lb, ub, C, d));
    EXPECT_EQ(s.status, qp::QpStatus::Infeasible);
}

TEST(SolveQp, RejectsIndefiniteHessian) {
    MatrixXd H(2, 2);
    H << 1, 0, 0, -1;
    VectorXd g = VectorXd::Zero(2);
    EXPECT_THROW(qp::solve_qp(unconstrained(H, g)), std::invalid_argument);
}

TEST(SolveQp, DeterministicBitIdenticalReruns) {
    sim::Rng rng(5);
    MatrixXd M(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = rng.normal();
    MatrixXd H = M.transpose() * M + 0.1 * MatrixXd::Identity(4, 4);
    VectorXd g(4), lb = VectorXd::Constant(4, -1), ub = VectorXd::Constant(4, 1);
    for (int i = 0; i < 4; ++i) g(i) = rng.normal();
    MatrixXd C(2, 4);
    VectorXd d(2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 4; ++j) C(i, j) = rng.normal();
        d(i) = 0.3;
    }
    const qp::QuadraticProgram p = make_qp(H, g, lb, ub, C, d);
    const qp::QpSolution a = qp::solve_qp(p);
    const qp::QpSolution b = qp::solve_qp(p);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(a.z(i), b.z(i));
    EXPECT_EQ(a.objective, b.objective);
}

TEST(SolveQp, WarmStartReturnsTheColdOptimum) {
    MatrixXd H = MatrixXd::Identity(3, 3) * 2.0;
    VectorXd g(3);
    g << -1, -2, -3;
    VectorXd lb = VectorXd::Constant(3, -0.8), ub = VectorXd::Constant(3, 0.8);
    const qp::QuadraticProgram p = make_qp(H, g, lb, ub, MatrixXd(0, 3), VectorXd(0));
    const qp::QpSolution cold = qp::solve_qp(p);
    qp::QpSettings st;
    st.warm_start = cold.z;
    const qp::QpSolution warm = qp::solve_qp(p, st);
    EXPECT_EQ(warm.status, qp::QpStatus::Optimal);
    EXPECT_NEAR((warm.z - cold.z).lpNorm<Eigen::Infinity>(), 0.0, 1e-9);
}

TEST(SolveQp, ScalingInvarianceOfTheArgmin) {
    MatrixXd H(2, 2);
    H << 4, 1, 1, 3;
    VectorXd g(2);
    g << -2, 1;
    VectorXd lb = VectorXd::Constant(2, -0.5), ub = VectorXd::Constant(2, 0.5);
    const qp::QuadraticProgram p1 = make_qp(H, g, lb, ub, MatrixXd(0, 2), VectorXd(0));
    const qp::QuadraticProgram p2 = make_qp(7.3 * H, 7.3 * g, lb, ub, MatrixXd(0, 2),
                                            VectorXd(0));
    const qp::QpSolution a = qp::solve_qp(p1);
    const qp::QpSolution b = qp::solve_qp(p2);
    EXPECT_NEAR((a.z - b.z).lpNorm<Eigen::Infinity>(), 0.0, 1e-8);
}

TEST(CheckKkt, ConsistentWithSolverAndSensitiveToPerturbation) {
    MatrixXd H = MatrixXd::Identity(3, 3);
    VectorXd g(3);
    g << -1, 0.5, 2;
    VectorXd lb = VectorXd::Constant(3, -0.7), ub = VectorXd::Constant(3, 0.7);
    const qp::QuadraticProgram p = make_qp(H, g, lb, ub, MatrixXd(0, 3), VectorXd(0));
    const qp::QpSolution s = qp::solve_qp(p);
    EXPECT_LE(qp::check_kkt(p, s.z), 1e-6);
    VectorXd zp = s.z;
    zp(0) += 1e-2;
    EXPECT_GT(qp::check_kkt(p, zp), 1e-6);
}

TEST(CheckKkt, UnconstrainedResidualIsTheGradientNorm) {
    MatrixXd H = MatrixXd::Identity(2, 2);
    VectorXd g(2);
    g << 3, -4;
    const qp::QuadraticProgram p = unconstrained(H, g);
    VectorXd z(2);
    z << 1, 1;
    EXPECT_NEAR(qp::check_kkt(p, z), (H * z + g).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(QpJson, DumpLoadRoundTrip) {
    MatrixXd H(2, 2);
    H << 2, 0.5, 0.5, 1;
    VectorXd g(2);
    g << -1, 2;
    VectorXd lb = VectorXd::Constant(2, -3), ub = VectorXd::Constant(2, 3);
    MatrixXd C(1, 2);
    C << 1, 1;
    VectorXd d(1);
    d << 1.5;
    const qp::QuadraticProgram p = make_qp(H, g, lb, ub, C, d);
    const qp::QuadraticProgram q = qp::qp_from_json(qp::to_json(p));
    EXPECT_TRUE(p.H.isApprox(q.H));
    EXPECT_TRUE(p.g.isApprox(q.g));
    EXPECT_TRUE(p.C.isApprox(q.C));
    const qp::QpSolution a = qp::solve_qp(p), b = qp::solve_qp(q);
    EXPECT_EQ(a.objective, b.objective);
}
