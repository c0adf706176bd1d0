#pragma once

// Small dense convex QP solver with optimality certification.
//
//   minimize 0.5 z'Hz + g'z   s.t.  lb <= z <= ub,  C z <= d
//
// Primal active-set method: H is factored once (Cholesky, with a tiny ridge
// when only semidefinite), each iteration solves the equality-constrained
// subproblem through the Schur complement of the working set. Bound
// constraints are handled as general inequality rows. Tie-breaking and
// constraint selection use lowest-index (Bland) rules, so identical inputs
// produce bit-identical iterates.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace hems::qp {

struct QuadraticProgram {
    Eigen::MatrixXd H;      // n x n, symmetric PSD
    Eigen::VectorXd g;      // n
    Eigen::VectorXd lb, ub; // box bounds (+-inf allowed)
    Eigen::MatrixXd C;      // m x n
    Eigen::VectorXd d;      // m

    Eigen::Index n() const { return g.size(); }
    Eigen::Index m() const { return d.size(); }

    void validate() const {
        const Eigen::Index nn = n();
        if (H.rows() != nn || H.cols() != nn) throw std::invalid_argument("qp: H shape");
        if (!H.isApprox(H.transpose(), 1e-10)) throw std::invalid_argument("qp: H not symmetric");
        if (lb.size() != nn || ub.size() != nn) throw std::invalid_argument("qp: bound shape");
        if ((lb.array() > ub.array()).any()) throw std::invalid_argument("qp: lb > ub");
        if (C.rows() != m() || (m() > 0 && C.cols() != nn))
            throw std::invalid_argument("qp: C shape");
    }
};

enum class QpStatus { Optimal, MaxIter, Infeasible };

inline const char* status_name(QpStatus s) {
    switch (s) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::MaxIter: return "max-iter";
        default: return "infeasible";
    }
}

struct QpSolution {
    Eigen::VectorXd z;
    double objective = 0.0;
    double kkt_residual = std::numeric_limits<double>::infinity();
    QpStatus status = QpStatus::MaxIter;
    int iterations = 0;
    std::vector<int> active_set;    // row indices into the stacked [C; I; -I]
};

struct QpSettings {
    double tol = 1e-6;
    int max_iter = 0;               // 0 -> automatic from problem size
    std::optional<Eigen::VectorXd> warm_start;
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// stacked inequality rows: a_i' z <= b_i for [C; I(ub); -I(lb)], finite rows only
struct Rows {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

inline Rows stack_rows(const QuadraticProgram& qp) {
    const Eigen::Index n = qp.n(), m = qp.m();
    std::vector<Eigen::Index> keep_ub, keep_lb;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (qp.ub(i) < kInf) keep_ub.push_back(i);
        if (qp.lb(i) > -kInf) keep_lb.push_back(i);
    }
    Rows r;
    r.A.setZero(m + static_cast<Eigen::Index>(keep_ub.size() + keep_lb.size()), n);
    r.b.resize(r.A.rows());
    if (m > 0) {
        r.A.topRows(m) = qp.C;
        r.b.head(m) = qp.d;
    }
    Eigen::Index k = m;
    for (Eigen::Index i : keep_ub) {
        r.A(k, i) = 1.0;
        r.b(k) = qp.ub(i);
        ++k;
    }
    for (Eigen::Index i : keep_lb) {
        r.A(k, i) = -1.0;
        r.b(k) = -qp.lb(i);
        ++k;
    }
    return r;
}

struct KktResult {
    double residual;
    Eigen::VectorXd mu;     // multipliers for the stacked rows
};

// residual for a candidate point: stationarity with least-squares multipliers on
// the eps-active rows (clamped non-negative), plus primal/complementarity terms
inline KktResult kkt_residual_at(const QuadraticProgram& qp, const Rows& rows,
                                 const Eigen::VectorXd& z, double eps_active) {
    const Eigen::VectorXd grad = qp.H * z + qp.g;
    const Eigen::VectorXd slack = rows.b - rows.A * z;
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < slack.size(); ++i)
        if (slack(i) <= eps_active) act.push_back(i);

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(rows.A.rows());
    if (!act.empty()) {
        Eigen::MatrixXd At(qp.n(), static_cast<Eigen::Index>(act.size()));
        for (size_t j = 0; j < act.size(); ++j) At.col(static_cast<Eigen::Index>(j)) = rows.A.row(act[j]).transpose();
        Eigen::VectorXd m_act = At.colPivHouseholderQr().solve(-grad);
        for (size_t j = 0; j < act.size(); ++j)
            mu(act[j]) = std::max(0.0, m_act(static_cast<Eigen::Index>(j)));
    }
    double r = (grad + rows.A.transpose() * mu).lpNorm<Eigen::Infinity>();
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
        r = std::max(r, -slack(i));                       // primal violation
        r = std::max(r, std::abs(mu(i) * slack(i)));      // complementarity
    }
    return {r, mu};
}

} // namespace detail

// residual measure used internally, for arbitrary candidate points
inline double check_kkt(const QuadraticProgram& qp, const Eigen::VectorXd& z,
                        double eps_active = 1e-7) {
    qp.validate();
    if (z.size() != qp.n()) throw std::invalid_argument("check_kkt: dimension mismatch");
    const detail::Rows rows = detail::stack_rows(qp);
    return detail::kkt_residual_at(qp, rows, z, eps_active).residual;
}

namespace detail {

struct ActiveSetCore {
    const Eigen::MatrixXd& A;
    const Eigen::VectorXd& b;
    Eigen::LLT<Eigen::MatrixXd> hfac;
    const Eigen::MatrixXd& H;
    const Eigen::VectorXd& g;
    double tol;

    // solve the equality-constrained step for working set W at point z:
    //   min 0.5 p'Hp + grad'p  s.t. A_W p = 0 ; returns step and multipliers
    bool eq_step(const std::vector<int>& w, const Eigen::VectorXd& z, Eigen::VectorXd& p,
                 Eigen::VectorXd& mu) const {
        const Eigen::VectorXd grad = H * z + g;
        const Eigen::VectorXd hg = hfac.solve(grad);
        if (w.empty()) {
            p = -hg;
            mu.resize(0);
            return true;
        }
        const Eigen::Index k = static_cast<Eigen::Index>(w.size());
        Eigen::MatrixXd Aw(k, A.cols());
        for (Eigen::Index j = 0; j < k; ++j) Aw.row(j) = A.row(w[static_cast<size_t>(j)]);
        const Eigen::MatrixXd HiAt = hfac.solve(Aw.transpose());
        const Eigen::MatrixXd S = Aw * HiAt;
        Eigen::LDLT<Eigen::MatrixXd> sfac(S);
        if (sfac.info() != Eigen::Success || (sfac.vectorD().array().abs() < 1e-14).any()) {
            // dependent working set; fall back to a pivoted solve
            Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
            if (!lu.isInvertible()) return false;
            mu = lu.solve(-Aw * hg);
        } else {
            mu = sfac.solve(-Aw * hg);
        }
        p = -hg - HiAt * mu;
        return true;
    }
};

} // namespace detail

inline QpSolution solve_qp(const QuadraticProgram& qp_in, const QpSettings& st = {}) {
    QuadraticProgram qp = qp_in;
    qp.validate();
    const Eigen::Index n = qp.n();

    // PSD check; ridge-regularize a semidefinite Hessian so Cholesky applies
    Eigen::MatrixXd Hs = 0.5 * (qp.H + qp.H.transpose());
    const double hnorm = std::max(1.0, Hs.lpNorm<Eigen::Infinity>());
    Eigen::LLT<Eigen::MatrixXd> hfac(Hs);
    if (hfac.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs);
        if (es.eigenvalues().minCoeff() < -1e-8 * hnorm)
            throw std::invalid_argument("solve_qp: H is not positive semidefinite");
        Hs.diagonal().array() += 1e-10 * hnorm;
        hfac.compute(Hs);
        if (hfac.info() != Eigen::Success)
            throw std::invalid_argument("solve_qp: H factorization failed");
    }

    const detail::Rows rows = detail::stack_rows(qp);
    const Eigen::Index mrows = rows.A.rows();
    const double tol = st.tol > 0 ? st.tol : 1e-6;
    const int max_iter = st.max_iter > 0 ? st.max_iter : static_cast<int>(20 + 10 * (n + mrows));

    // feasible start: clamp into the box, then repair general rows if violated
    Eigen::VectorXd z = st.warm_start && st.warm_start->size() == n
                            ? *st.warm_start
                            : Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = std::clamp(z(i), qp.lb(i), qp.ub(i));

    QpSolution sol;
    if (qp.m() > 0 && ((qp.C * z - qp.d).array() > tol).any()) {
        // phase 1: minimize the total violation of the general rows inside the box
        QuadraticProgram ph;
        const Eigen::Index m = qp.m();
        ph.H = Eigen::MatrixXd::Zero(n + m, n + m);
        ph.H.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n) * 1e-6;
        ph.g = Eigen::VectorXd::Zero(n + m);
        ph.g.tail(m).setOnes();
        ph.lb.setConstant(n + m, 0.0);
        ph.lb.head(n) = qp.lb;
        ph.ub.setConstant(n + m, detail::kInf);
        ph.ub.head(n) = qp.ub;
        ph.C.setZero(m, n + m);
        ph.C.leftCols(n) = qp.C;
        ph.C.rightCols(m) = -Eigen::MatrixXd::Identity(m, m);
        ph.d = qp.d;
        QpSettings pst;
        pst.tol = tol;
        Eigen::VectorXd w0(n + m);
        w0.head(n) = z;
        w0.tail(m) = ((qp.C * z - qp.d).array().max(0.0)).matrix();
        pst.warm_start = w0;
        const QpSolution ph_sol = solve_qp(ph, pst);
        if (ph_sol.status != QpStatus::Optimal || ph_sol.z.tail(m).maxCoeff() > 1e2 * tol) {
            sol.status = QpStatus::Infeasible;
            sol.z = z;
            sol.objective = 0.5 * z.dot(qp.H * z) + qp.g.dot(z);
            return sol;
        }
        z = ph_sol.z.head(n);
        for (Eigen::Index i = 0; i < n; ++i) z(i) = std::clamp(z(i), qp.lb(i), qp.ub(i));
    }

    detail::ActiveSetCore core{rows.A, rows.b, std::move(hfac), Hs, qp.g, tol};

    // working set: eps-active rows at the start point, lowest index first
    std::vector<int> w;
    {
        const Eigen::VectorXd slack = rows.b - rows.A * z;
        for (Eigen::Index i = 0; i < mrows && static_cast<Eigen::Index>(w.size()) < n; ++i)
            if (slack(i) <= 1e-9) w.push_back(static_cast<int>(i));
    }

    Eigen::VectorXd p, mu;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (!core.eq_step(w, z, p, mu)) {
            // dependent set: drop the most recently added row
            w.pop_back();
            continue;
        }
        if (p.lpNorm<Eigen::Infinity>() <= 1e-11 * (1.0 + z.lpNorm<Eigen::Infinity>())) {
            int drop = -1;
            double most_neg = -1e-9;
            for (size_t j = 0; j < w.size(); ++j)
                if (mu(static_cast<Eigen::Index>(j)) < most_neg) {
                    most_neg = mu(static_cast<Eigen::Index>(j));
                    drop = static_cast<int>(j);
                    break;  // Bland: first negative multiplier
                }
            if (drop < 0) break;  // KKT satisfied
            w.erase(w.begin() + drop);
            continue;
        }
        // ratio test against rows not in the working set
        double alpha = 1.0;
        int block = -1;
        const Eigen::VectorXd Ap = rows.A * p;
        const Eigen::VectorXd slack = rows.b - rows.A * z;
        for (Eigen::Index i = 0; i < mrows; ++i) {
            if (Ap(i) <= 1e-12) continue;
            bool in_w = false;
            for (int wi : w)
                if (wi == static_cast<int>(i)) { in_w = true; break; }
            if (in_w) continue;
            const double a = std::max(0.0, slack(i)) / Ap(i);
            if (a < alpha - 1e-15) {
                alpha = a;
                block = static_cast<int>(i);
            }
        }
        z += alpha * p;
        if (block >= 0 && static_cast<Eigen::Index>(w.size()) < n) w.push_back(block);
    }

    sol.z = z;
    sol.objective = 0.5 * z.dot(qp.H * z) + qp.g.dot(z);
    sol.iterations = it;
    sol.active_set = w;
    sol.kkt_residual = detail::kkt_residual_at(qp, rows, z, 1e-7).residual;
    sol.status = (sol.kkt_residual <= tol) ? QpStatus::Optimal : QpStatus::MaxIter;
    return sol;
}

// --- JSON dump/load for bug reports -------------------------------------------

inline nlohmann::json to_json(const QuadraticProgram& qp) {
    auto mat = [](const Eigen::MatrixXd& m) {
        std::vector<std::vector<double>> out(static_cast<size_t>(m.rows()));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            out[static_cast<size_t>(i)].resize(static_cast<size_t>(m.cols()));
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                out[static_cast<size_t>(i)][static_cast<size_t>(j)] = m(i, j);
        }
        return out;
    };
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    return nlohmann::json{{"schema", "hems-qp-v1"}, {"H", mat(qp.H)},   {"g", vec(qp.g)},
                          {"lb", vec(qp.lb)},       {"ub", vec(qp.ub)}, {"C", mat(qp.C)},
                          {"d", vec(qp.d)}};
}

inline QuadraticProgram qp_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "hems-qp-v1")
        throw std::invalid_argument("qp_from_json: unknown schema");
    auto mat = [&](const char* key) {
        const auto rows = j.at(key).get<std::vector<std::vector<double>>>();
        Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t k = 0; k < rows[i].size(); ++k)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        return m;
    };
    auto vec = [&](const char* key) {
        const auto v = j.at(key).get<std::vector<double>>();
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))
            .eval();
    };
    QuadraticProgram qp;
    qp.H = mat("H");
    qp.g = vec("g");
    qp.lb = vec("lb");
    qp.ub = vec("ub");
    qp.C = mat("C");
    qp.d = vec("d");
    if (qp.C.rows() == 0) qp.C.resize(0, qp.n());
    qp.validate();
    return qp;
}

} // namespace hems::qp
