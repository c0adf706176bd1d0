#pragma once

// Load forecasting from lagged covariates: persistence and ridge-AR baselines,
// a gradient-boosted-trees regressor with recursive multi-step prediction and
// an optional external future covariate, plus the evaluation metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hems/sim.hpp"

namespace hems::forecast {

constexpr double kPeriodS = 5.0;
inline const std::vector<double>& lookback_grid_s() {
    static const std::vector<double> g{5, 10, 30, 60, 350, 600, 1800};
    return g;
}

// --- frame ----------------------------------------------------------------------

struct TimeSeriesFrame {
    double period_s = kPeriodS;
    std::vector<double> t_s;            // strictly increasing, uniform
    std::vector<double> p_tot_kw;
    std::vector<double> v_kn, n_prop_s_rpm, n_prop_p_rpm, delta_s_deg, delta_p_deg;
    std::vector<size_t> segment_starts{0};  // gap-split boundaries

    size_t size() const { return p_tot_kw.size(); }

    size_t segment_of(size_t i) const {
        size_t s = 0;
        for (size_t b : segment_starts)
            if (b <= i) s = b;
        return s;
    }

    void validate() const {
        const size_t n = size();
        if (t_s.size() != n || v_kn.size() != n || n_prop_s_rpm.size() != n ||
            n_prop_p_rpm.size() != n || delta_s_deg.size() != n || delta_p_deg.size() != n)
            throw std::invalid_argument("TimeSeriesFrame: ragged columns");
        for (size_t i = 1; i < n; ++i)
            if (t_s[i] <= t_s[i - 1])
                throw std::invalid_argument("TimeSeriesFrame: timestamps not increasing");
    }

    TimeSeriesFrame slice(size_t begin, size_t end) const {
        TimeSeriesFrame out;
        out.period_s = period_s;
        auto cp = [&](const std::vector<double>& src, std::vector<double>& dst) {
            dst.assign(src.begin() + static_cast<long>(begin), src.begin() + static_cast<long>(end));
        };
        cp(t_s, out.t_s);
        cp(p_tot_kw, out.p_tot_kw);
        cp(v_kn, out.v_kn);
        cp(n_prop_s_rpm, out.n_prop_s_rpm);
        cp(n_prop_p_rpm, out.n_prop_p_rpm);
        cp(delta_s_deg, out.delta_s_deg);
        cp(delta_p_deg, out.delta_p_deg);
        out.segment_starts.clear();
        for (size_t b : segment_starts)
            if (b > begin && b < end) out.segment_starts.push_back(b - begin);
        out.segment_starts.insert(out.segment_starts.begin(), 0);
        return out;
    }

    static TimeSeriesFrame from_mission(const sim::MissionProfile& m) {
        TimeSeriesFrame f;
        f.period_s = m.source_period_s;
        const size_t n = m.p_load_kw.size();
        f.p_tot_kw = m.p_load_kw;
        f.t_s.resize(n);
        for (size_t i = 0; i < n; ++i) f.t_s[i] = static_cast<double>(i) * f.period_s;
        auto fill = [&](const std::vector<double>& src, std::vector<double>& dst) {
            dst = src.empty() ? std::vector<double>(n, 0.0) : src;
        };
        fill(m.v_kn, f.v_kn);
        fill(m.n_prop_s_rpm, f.n_prop_s_rpm);
        fill(m.n_prop_p_rpm, f.n_prop_p_rpm);
        fill(m.delta_s_deg, f.delta_s_deg);
        fill(m.delta_p_deg, f.delta_p_deg);
        return f;
    }
};

// --- requests and results -------------------------------------------------------

enum class Provenance { Persistence, Ar, Gbt, External, Perfect };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Persistence: return "persistence";
        case Provenance::Ar: return "ar";
        case Provenance::Gbt: return "gbt";
        case Provenance::External: return "external";
        default: return "perfect";
    }
}

struct ForecastRequest {
    size_t t0_idx = 0;
    double delta_minus_s = 60.0;
    double delta_plus_s = 900.0;

    size_t lags() const { return static_cast<size_t>(delta_minus_s / kPeriodS); }
    size_t horizon_steps() const { return static_cast<size_t>(delta_plus_s / kPeriodS); }

    void validate() const {
        const auto& grid = lookback_grid_s();
        if (std::find(grid.begin(), grid.end(), delta_minus_s) == grid.end())
            throw std::invalid_argument("ForecastRequest: delta_minus outside the lookback grid");
        if (std::abs(delta_plus_s / kPeriodS - std::round(delta_plus_s / kPeriodS)) > 1e-9 ||
            delta_plus_s <= 0)
            throw std::invalid_argument("ForecastRequest: horizon must be a multiple of 5 s");
    }
};

struct Forecast {
    std::vector<double> p_kw;   // (t0, t0 + delta_plus], 5 s steps, clipped at 0
    Provenance provenance = Provenance::Persistence;
};

// --- splits ---------------------------------------------------------------------

struct Split {
    TimeSeriesFrame train, validation, test;
};

inline Split temporal_split(const TimeSeriesFrame& f) {
    f.validate();
    const size_t n = f.size();
    if (n < 100) throw std::invalid_argument("temporal_split: frame shorter than 100 rows");
    const size_t n_train = n * 6 / 10;
    const size_t n_val = n * 2 / 10;
    Split s;
    s.train = f.slice(0, n_train);
    s.validation = f.slice(n_train, n_train + n_val);
    s.test = f.slice(n_train + n_val, n);
    return s;
}

// --- baselines ------------------------------------------------------------------

inline Forecast persistence_forecast(const TimeSeriesFrame& f, const ForecastRequest& req) {
    req.validate();
    if (req.t0_idx >= f.size())
        throw std::invalid_argument("persistence_forecast: t0 outside the frame");
    Forecast out;
    out.provenance = Provenance::Persistence;
    out.p_kw.assign(req.horizon_steps(), std::max(0.0, f.p_tot_kw[req.t0_idx]));
    return out;
}

// --- feature schema (shared by AR and GBT) --------------------------------------

// lag features of all covariates plus p_tot over the lookback window; records
// per-feature time offsets so tests can audit that nothing looks past t0
struct FeatureSchema {
    size_t lags = 12;
    bool with_external = false;

    size_t count() const { return 6 * lags + (with_external ? 1 : 0); }

    // offsets in samples relative to t0 (0 = t0 itself, positive = past)
    std::vector<int> lag_offsets() const {
        std::vector<int> off;
        for (int s = 0; s < 6; ++s)
            for (size_t j = 0; j < lags; ++j) off.push_back(static_cast<int>(j));
        if (with_external) off.push_back(-1);   // declared future input
        return off;
    }

    // fills `x`; p_hist carries p_tot with recursive predictions appended
    void build(const TimeSeriesFrame& f, const std::vector<double>& p_hist, size_t t,
               std::optional<double> external_next, std::vector<double>& x) const {
        x.clear();
        x.reserve(count());
        for (size_t j = 0; j < lags; ++j) x.push_back(p_hist[t - j]);
        auto push_col = [&](const std::vector<double>& col) {
            const size_t tc = std::min(t, col.size() - 1);   // covariates persist past t0
            for (size_t j = 0; j < lags; ++j) x.push_back(col[tc - std::min(tc, j)]);
        };
        push_col(f.v_kn);
        push_col(f.n_prop_s_rpm);
        push_col(f.n_prop_p_rpm);
        push_col(f.delta_s_deg);
        push_col(f.delta_p_deg);
        if (with_external) x.push_back(external_next.value_or(0.0));
    }
};

// --- ridge AR baseline ----------------------------------------------------------

struct ArModel {
    FeatureSchema schema;
    Eigen::VectorXd w;      // schema.count() weights
    double intercept = 0.0;
    double ridge = 1e-3;
};

inline ArModel ar_fit(const TimeSeriesFrame& train, size_t lags, double ridge) {
    if (ridge < 0) throw std::invalid_argument("ar_fit: ridge must be >= 0");
    ArModel m;
    m.schema.lags = lags;
    m.ridge = ridge;
    const size_t nf = m.schema.count();
    std::vector<double> x;
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(nf + 1, nf + 1);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(nf + 1);
    size_t rows = 0;
    for (size_t seg = 0; seg < train.segment_starts.size(); ++seg) {
        const size_t s0 = train.segment_starts[seg];
        const size_t s1 = seg + 1 < train.segment_starts.size() ? train.segment_starts[seg + 1]
                                                                : train.size();
        if (s1 - s0 < lags + 1) continue;
        for (size_t t = s0 + lags - 1; t + 1 < s1; ++t) {
            m.schema.build(train, train.p_tot_kw, t, std::nullopt, x);
            Eigen::VectorXd xi(nf + 1);
            for (size_t k = 0; k < nf; ++k) xi(static_cast<Eigen::Index>(k)) = x[k];
            xi(static_cast<Eigen::Index>(nf)) = 1.0;
            xtx.noalias() += xi * xi.transpose();
            xty.noalias() += xi * train.p_tot_kw[t + 1];
            ++rows;
        }
    }
    if (rows < nf + 1 && ridge == 0)
        throw std::invalid_argument("ar_fit: singular design; increase ridge above 0");
    Eigen::MatrixXd reg = xtx;
    reg.topLeftCorner(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf))
        .diagonal()
        .array() += ridge;   // intercept unpenalized
    Eigen::LDLT<Eigen::MatrixXd> fac(reg);
    const Eigen::VectorXd sol = fac.solve(xty);
    if (ridge == 0 && ((reg * sol - xty).lpNorm<Eigen::Infinity>() >
                       1e-6 * (1.0 + xty.lpNorm<Eigen::Infinity>())))
        throw std::invalid_argument("ar_fit: singular design; increase ridge above 0");
    m.w = sol.head(static_cast<Eigen::Index>(nf));
    m.intercept = sol(static_cast<Eigen::Index>(nf));
    return m;
}

inline Forecast ar_predict(const ArModel& m, const TimeSeriesFrame& f,
                           const ForecastRequest& req) {
    req.validate();
    const size_t lags = m.schema.lags;
    if (req.t0_idx + 1 < lags || req.t0_idx >= f.size())
        throw std::invalid_argument("ar_predict: not enough history for the lookback");
    std::vector<double> hist(f.p_tot_kw.begin(),
                             f.p_tot_kw.begin() + static_cast<long>(req.t0_idx) + 1);
    Forecast out;
    out.provenance = Provenance::Ar;
    std::vector<double> x;
    for (size_t h = 0; h < req.horizon_steps(); ++h) {
        const size_t t = hist.size() - 1;
        m.schema.build(f, hist, t, std::nullopt, x);
        double y = m.intercept;
        for (size_t k = 0; k < x.size(); ++k) y += m.w(static_cast<Eigen::Index>(k)) * x[k];
        y = std::max(0.0, y);
        out.p_kw.push_back(y);
        hist.push_back(y);
    }
    return out;
}

// convenience wrapper: fit on the frame's chronological train split, then predict
inline Forecast ar_forecast(const TimeSeriesFrame& f, const ForecastRequest& req,
                            double ridge) {
    const Split s = temporal_split(f);
    const ArModel m = ar_fit(s.train, req.lags(), ridge);
    return ar_predict(m, f, req);
}

// --- gradient-boosted trees -----------------------------------------------------

struct GbtHyper {
    double learning_rate = 0.1;
    int max_depth = 5;
    double min_loss_reduction = 0.0;    // absolute SSE gain threshold
    double row_subsample = 0.8;
    double feature_subsample = 0.8;
    int max_trees = 300;
    double delta_minus_s = 60.0;
};

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1, right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const std::vector<double>& x) const {
        int i = 0;
        while (nodes[static_cast<size_t>(i)].feature >= 0) {
            const TreeNode& nd = nodes[static_cast<size_t>(i)];
            i = x[static_cast<size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<size_t>(i)].value;
    }
};

struct GbtModel {
    FeatureSchema schema;
    GbtHyper hyper;
    double base = 0.0;
    std::vector<Tree> trees;

    double predict_one(const std::vector<double>& x) const {
        double y = base;
        for (const Tree& t : trees) y += hyper.learning_rate * t.predict(x);
        return y;
    }
};

namespace detail {

struct SupervisedSet {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
};

inline SupervisedSet build_supervised(const TimeSeriesFrame& f, const FeatureSchema& schema) {
    SupervisedSet out;
    std::vector<double> x;
    const size_t lags = schema.lags;
    for (size_t seg = 0; seg < f.segment_starts.size(); ++seg) {
        const size_t s0 = f.segment_starts[seg];
        const size_t s1 =
            seg + 1 < f.segment_starts.size() ? f.segment_starts[seg + 1] : f.size();
        if (s1 - s0 < lags + 1) continue;
        for (size_t t = s0 + lags - 1; t + 1 < s1; ++t) {
            schema.build(f, f.p_tot_kw, t, f.p_tot_kw[t + 1], x);
            out.x.push_back(x);
            out.y.push_back(f.p_tot_kw[t + 1]);
        }
    }
    return out;
}

class TreeBuilder {
  public:
    TreeBuilder(const SupervisedSet& data, const std::vector<double>& residual,
                const GbtHyper& hp, sim::Rng& rng)
        : data_(data), res_(residual), hp_(hp), rng_(rng) {}

    Tree build(const std::vector<size_t>& rows) {
        Tree t;
        grow(t, rows, 0);
        return t;
    }

  private:
    int grow(Tree& t, const std::vector<size_t>& rows, int depth) {
        const int idx = static_cast<int>(t.nodes.size());
        t.nodes.emplace_back();
        double mean = 0.0;
        for (size_t r : rows) mean += res_[r];
        mean /= static_cast<double>(rows.size());
        t.nodes[static_cast<size_t>(idx)].value = mean;
        if (depth >= hp_.max_depth || rows.size() < 2 * kMinLeaf) return idx;

        double sse_parent = 0.0;
        for (size_t r : rows) {
            const double e = res_[r] - mean;
            sse_parent += e * e;
        }

        const size_t nf = data_.x[0].size();
        const auto n_try = std::max<size_t>(
            1, static_cast<size_t>(std::lround(hp_.feature_subsample * static_cast<double>(nf))));
        std::vector<size_t> feats(nf);
        for (size_t i = 0; i < nf; ++i) feats[i] = i;
        for (size_t i = 0; i < n_try; ++i) {
            const size_t j = i + rng_.range(0, nf - i);
            std::swap(feats[i], feats[j]);
        }
        feats.resize(n_try);
        std::sort(feats.begin(), feats.end());

        double best_gain = hp_.min_loss_reduction;
        size_t best_f = 0;
        double best_thr = 0.0;
        std::vector<size_t> order(rows);
        for (size_t fi : feats) {
            std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                const double va = data_.x[a][fi], vb = data_.x[b][fi];
                return va < vb || (va == vb && a < b);
            });
            double sum_l = 0.0, cnt_l = 0.0;
            double sum_tot = mean * static_cast<double>(rows.size());
            for (size_t k = 0; k + 1 < order.size(); ++k) {
                sum_l += res_[order[k]];
                cnt_l += 1.0;
                const double v = data_.x[order[k]][fi];
                const double v_next = data_.x[order[k + 1]][fi];
                if (v == v_next) continue;
                if (cnt_l < kMinLeaf || order.size() - k - 1 < kMinLeaf) continue;
                const double cnt_r = static_cast<double>(order.size()) - cnt_l;
                const double sum_r = sum_tot - sum_l;
                const double gain = sum_l * sum_l / cnt_l + sum_r * sum_r / cnt_r -
                                    sum_tot * sum_tot / static_cast<double>(order.size());
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_f = fi;
                    best_thr = 0.5 * (v + v_next);
                }
            }
        }
        if (best_gain <= hp_.min_loss_reduction) return idx;

        std::vector<size_t> left, right;
        for (size_t r : rows)
            (data_.x[r][best_f] <= best_thr ? left : right).push_back(r);
        if (left.size() < kMinLeaf || right.size() < kMinLeaf) return idx;
        t.nodes[static_cast<size_t>(idx)].feature = static_cast<int>(best_f);
        t.nodes[static_cast<size_t>(idx)].threshold = best_thr;
        const int li = grow(t, left, depth + 1);
        const int ri = grow(t, right, depth + 1);
        t.nodes[static_cast<size_t>(idx)].left = li;
        t.nodes[static_cast<size_t>(idx)].right = ri;
        return idx;
    }

    static constexpr size_t kMinLeaf = 5;
    const SupervisedSet& data_;
    const std::vector<double>& res_;
    const GbtHyper& hp_;
    sim::Rng& rng_;
};

} // namespace detail

// trains one-step-ahead boosted trees; tree count early-stops on validation MSE
inline GbtModel gbt_train(const TimeSeriesFrame& train, const TimeSeriesFrame& val,
                          const GbtHyper& hp, bool with_external = false,
                          uint64_t seed = 1234) {
    FeatureSchema schema;
    schema.lags = static_cast<size_t>(hp.delta_minus_s / kPeriodS);
    schema.with_external = with_external;
    const detail::SupervisedSet tr = detail::build_supervised(train, schema);
    const detail::SupervisedSet va = detail::build_supervised(val, schema);
    if (tr.x.empty() || va.x.empty())
        throw std::invalid_argument("gbt_train: empty split after feature construction");

    GbtModel m;
    m.schema = schema;
    m.hyper = hp;
    double base = 0.0;
    for (double y : tr.y) base += y;
    m.base = base / static_cast<double>(tr.y.size());

    std::vector<double> pred_tr(tr.y.size(), m.base), pred_va(va.y.size(), m.base);
    std::vector<double> residual(tr.y.size());
    sim::Rng rng(seed);
    double best_mse = std::numeric_limits<double>::infinity();
    int best_count = 0;
    constexpr int kPatience = 25;
    for (int k = 0; k < hp.max_trees; ++k) {
        for (size_t i = 0; i < tr.y.size(); ++i) residual[i] = tr.y[i] - pred_tr[i];
        std::vector<size_t> rows;
        rows.reserve(tr.y.size());
        for (size_t i = 0; i < tr.y.size(); ++i)
            if (rng.uniform() < hp.row_subsample) rows.push_back(i);
        if (rows.size() < 10) rows.assign(tr.y.size(), 0);   // degenerate subsample
        detail::TreeBuilder tb(tr, residual, hp, rng);
        Tree t = tb.build(rows);
        m.trees.push_back(t);
        for (size_t i = 0; i < tr.y.size(); ++i)
            pred_tr[i] += hp.learning_rate * t.predict(tr.x[i]);
        double mse = 0.0;
        for (size_t i = 0; i < va.y.size(); ++i) {
            pred_va[i] += hp.learning_rate * t.predict(va.x[i]);
            const double e = va.y[i] - pred_va[i];
            mse += e * e;
        }
        mse /= static_cast<double>(va.y.size());
        if (mse < best_mse - 1e-12) {
            best_mse = mse;
            best_count = static_cast<int>(m.trees.size());
        } else if (static_cast<int>(m.trees.size()) - best_count >= kPatience) {
            break;
        }
    }
    m.trees.resize(static_cast<size_t>(std::max(1, best_count)));
    return m;
}

// recursive multi-step prediction; external horizon values enter the feature
// vector as a declared future covariate
inline Forecast gbt_predict(const GbtModel& m, const TimeSeriesFrame& f,
                            const ForecastRequest& req,
                            const Forecast* external = nullptr) {
    req.validate();
    const size_t lags = m.schema.lags;
    if (req.t0_idx + 1 < lags || req.t0_idx >= f.size())
        throw std::invalid_argument("gbt_predict: history does not cover the lookback");
    const size_t H = req.horizon_steps();
    if (external && external->p_kw.size() != H)
        throw std::invalid_argument("gbt_predict: external forecast length mismatch");
    if (m.schema.with_external && !external)
        throw std::invalid_argument("gbt_predict: model expects an external covariate");

    std::vector<double> hist(f.p_tot_kw.begin(),
                             f.p_tot_kw.begin() + static_cast<long>(req.t0_idx) + 1);
    Forecast out;
    out.provenance = Provenance::Gbt;
    std::vector<double> x;
    for (size_t h = 0; h < H; ++h) {
        const size_t t = hist.size() - 1;
        const std::optional<double> ext =
            m.schema.with_external ? std::optional<double>(external->p_kw[h]) : std::nullopt;
        m.schema.build(f, hist, t, ext, x);
        const double y = std::max(0.0, m.predict_one(x));
        out.p_kw.push_back(y);
        hist.push_back(y);
    }
    return out;
}

// validation MAE of recursive multi-step forecasts, used for grid selection
inline double recursive_val_mae(const GbtModel& m, const TimeSeriesFrame& val,
                                double delta_plus_s, size_t stride = 24) {
    const size_t lags = m.schema.lags;
    const auto H = static_cast<size_t>(delta_plus_s / kPeriodS);
    double acc = 0.0;
    size_t cnt = 0;
    for (size_t t0 = lags; t0 + H < val.size(); t0 += stride) {
        ForecastRequest rq;
        rq.t0_idx = t0;
        rq.delta_minus_s = m.hyper.delta_minus_s;
        rq.delta_plus_s = delta_plus_s;
        const Forecast fc = gbt_predict(m, val, rq);
        for (size_t h = 0; h < H; ++h) {
            acc += std::abs(fc.p_kw[h] - val.p_tot_kw[t0 + 1 + h]);
            ++cnt;
        }
    }
    return cnt > 0 ? acc / static_cast<double>(cnt) : std::numeric_limits<double>::infinity();
}

// grid search: minimizes validation MAE of recursive forecasts over the grid
inline GbtModel gbt_fit(const TimeSeriesFrame& train, const TimeSeriesFrame& val,
                        const std::vector<GbtHyper>& grid, double delta_plus_s = 900.0,
                        bool with_external = false, uint64_t seed = 1234) {
    if (grid.empty()) throw std::invalid_argument("gbt_fit: empty hyperparameter grid");
    GbtModel best;
    double best_mae = std::numeric_limits<double>::infinity();
    for (size_t gi = 0; gi < grid.size(); ++gi) {
        GbtModel m = gbt_train(train, val, grid[gi], with_external, seed + gi);
        const double mae = recursive_val_mae(m, val, delta_plus_s);
        if (mae < best_mae) {
            best_mae = mae;
            best = std::move(m);
        }
    }
    return best;
}

// --- metrics --------------------------------------------------------------------

struct ForecastMetrics {
    double mae_kw = 0.0;
    std::optional<double> mape_pct;     // floor rule may leave it undefined
    std::optional<double> ppmcc;        // undefined for constant truth
    size_t n = 0;
};

inline ForecastMetrics evaluate_metrics(const std::vector<double>& pred,
                                        const std::vector<double>& truth,
                                        double mape_floor_kw = 0.0) {
    if (pred.size() != truth.size() || pred.empty())
        throw std::invalid_argument("evaluate_metrics: length mismatch");
    ForecastMetrics m;
    m.n = pred.size();
    double mae = 0.0, mape = 0.0;
    size_t n_mape = 0;
    double sp = 0, st = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        mae += std::abs(pred[i] - truth[i]);
        if (std::abs(truth[i]) > mape_floor_kw && truth[i] != 0.0) {
            mape += std::abs((pred[i] - truth[i]) / truth[i]);
            ++n_mape;
        }
        sp += pred[i];
        st += truth[i];
    }
    m.mae_kw = mae / static_cast<double>(pred.size());
    if (n_mape > 0) m.mape_pct = 100.0 * mape / static_cast<double>(n_mape);
    const double mp = sp / static_cast<double>(pred.size());
    const double mt = st / static_cast<double>(truth.size());
    double cpp = 0, ctt = 0, cpt = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        cpp += (pred[i] - mp) * (pred[i] - mp);
        ctt += (truth[i] - mt) * (truth[i] - mt);
        cpt += (pred[i] - mp) * (truth[i] - mt);
    }
    if (ctt > 1e-12 && cpp > 1e-12) m.ppmcc = cpt / std::sqrt(cpp * ctt);
    return m;
}

// --- leakage audit ----------------------------------------------------------------

// true when every non-external feature the schema reads at t0 lies at or before t0
inline bool audit_no_leakage(const FeatureSchema& schema) {
    const std::vector<int> off = schema.lag_offsets();
    size_t k = 0;
    for (int o : off) {
        const bool is_external = schema.with_external && k == off.size() - 1;
        if (!is_external && o < 0) return false;
        ++k;
    }
    return true;
}

// --- model persistence ------------------------------------------------------------

inline nlohmann::json gbt_to_json(const GbtModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& t : m.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& nd : t.nodes)
            nodes.push_back({{"f", nd.feature},
                             {"t", nd.threshold},
                             {"v", nd.value},
                             {"l", nd.left},
                             {"r", nd.right}});
        trees.push_back(std::move(nodes));
    }
    return nlohmann::json{{"schema", "hems-gbt-v1"},
                          {"lags", m.schema.lags},
                          {"with_external", m.schema.with_external},
                          {"base", m.base},
                          {"learning_rate", m.hyper.learning_rate},
                          {"max_depth", m.hyper.max_depth},
                          {"min_loss_reduction", m.hyper.min_loss_reduction},
                          {"row_subsample", m.hyper.row_subsample},
                          {"feature_subsample", m.hyper.feature_subsample},
                          {"delta_minus_s", m.hyper.delta_minus_s},
                          {"trees", std::move(trees)}};
}

inline GbtModel gbt_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "hems-gbt-v1")
        throw std::invalid_argument("gbt_from_json: unknown schema");
    GbtModel m;
    m.schema.lags = j.at("lags").get<size_t>();
    m.schema.with_external = j.at("with_external").get<bool>();
    m.base = j.at("base").get<double>();
    m.hyper.learning_rate = j.at("learning_rate").get<double>();
    m.hyper.max_depth = j.at("max_depth").get<int>();
    m.hyper.min_loss_reduction = j.at("min_loss_reduction").get<double>();
    m.hyper.row_subsample = j.at("row_subsample").get<double>();
    m.hyper.feature_subsample = j.at("feature_subsample").get<double>();
    m.hyper.delta_minus_s = j.at("delta_minus_s").get<double>();
    for (const auto& tj : j.at("trees")) {
        Tree t;
        for (const auto& nj : tj) {
            TreeNode nd;
            nd.feature = nj.at("f").get<int>();
            nd.threshold = nj.at("t").get<double>();
            nd.value = nj.at("v").get<double>();
            nd.left = nj.at("l").get<int>();
            nd.right = nj.at("r").get<int>();
            t.nodes.push_back(nd);
        }
        m.trees.push_back(std::move(t));
    }
    return m;
}

} // namespace hems::forecast
