#pragma once

// Command implementations behind the CLI: simulate, sweep, horizon, forecast,
// gen, config. Kept in the library so tests can drive them in-process.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hems/config.hpp"
#include "hems/csvio.hpp"
#include "hems/forecast.hpp"
#include "hems/svg.hpp"

namespace hems::app {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonArgs {
    std::string config_path;
    std::string mission_path;       // file, or "gen:<seed>[:<hours>]"
    std::string corpus_dir;
    std::string out_dir = "out";
    std::string strategy_override;  // filter60|filter600|filter|ecms|mpc
    std::string aging_override;     // bol|eol
    std::string forecaster_override;
    std::string external_path;
    std::string model_path;
    uint64_t seed = 1;
    double hours = 2.0;
    double horizon_min = 0.0;
    int jobs = 0;
};

inline void write_error_json(const std::string& out_dir, const std::string& message) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream out(fs::path(out_dir) / "error.json");
    out << json{{"error", message}}.dump(2) << "\n";
}

inline config::ToolkitConfig load_or_default(const std::string& path) {
    if (path.empty()) return config::ToolkitConfig{};
    return config::load_config(path);
}

namespace detail {

inline void apply_strategy(const std::string& name, sim::SimConfig& cfg,
                           ems::FilterConfig& filter) {
    if (name.empty()) return;
    if (name == "filter" || name == "filter600") {
        cfg.strategy = sim::Strategy::Filter;
        filter.tau_fd_s = 600.0;
    } else if (name == "filter60") {
        cfg.strategy = sim::Strategy::Filter;
        filter.tau_fd_s = 60.0;
    } else if (name == "ecms") {
        cfg.strategy = sim::Strategy::Ecms;
    } else if (name == "mpc" || name == "mpc-perfect") {
        cfg.strategy = sim::Strategy::Mpc;
        cfg.forecast = sim::ForecastMode::Perfect;
    } else if (name == "mpc-data") {
        cfg.strategy = sim::Strategy::Mpc;
        cfg.forecast = sim::ForecastMode::Model;
    } else {
        throw std::invalid_argument("unknown strategy '" + name + "'");
    }
}

inline sim::MissionProfile resolve_mission(const CommonArgs& args) {
    if (args.mission_path.rfind("gen:", 0) == 0) {
        std::string spec = args.mission_path.substr(4);
        uint64_t seed = args.seed;
        double hours = args.hours;
        const size_t colon = spec.find(':');
        if (colon != std::string::npos) {
            seed = std::stoull(spec.substr(0, colon));
            hours = std::stod(spec.substr(colon + 1));
        } else if (!spec.empty()) {
            seed = std::stoull(spec);
        }
        return sim::generate_synthetic_mission(seed, hours * 3600.0);
    }
    if (args.mission_path == "rect")
        return sim::generate_rectangular_mission(1300.0, 3800.0, 1200.0, 600.0, 2700.0);
    return csvio::read_mission_csv(args.mission_path,
                                   fs::path(args.mission_path).stem().string());
}

// GBT-backed preview hook for data-driven MPC
inline sim::ForecastHook make_gbt_hook(std::shared_ptr<forecast::GbtModel> model,
                                       std::shared_ptr<std::vector<double>> external_5s) {
    return [model, external_5s](const sim::MissionProfile& m, size_t t0_s, int n_steps,
                                double t_step_s) {
        const forecast::TimeSeriesFrame full = forecast::TimeSeriesFrame::from_mission(m);
        const size_t t0_idx = t0_s / 5;
        forecast::ForecastRequest rq;
        rq.t0_idx = t0_idx;
        rq.delta_minus_s = model->hyper.delta_minus_s;
        rq.delta_plus_s = std::max(t_step_s * n_steps, 5.0);
        std::vector<double> means(static_cast<size_t>(n_steps));
        const size_t lags = model->schema.lags;
        if (t0_idx + 1 < lags) {
            // not enough history yet; persist the current load
            const double cur = full.p_tot_kw[std::min(t0_idx, full.size() - 1)];
            std::fill(means.begin(), means.end(), cur);
            return means;
        }
        forecast::Forecast ext;
        const forecast::Forecast* extp = nullptr;
        if (model->schema.with_external) {
            ext.p_kw.resize(rq.horizon_steps());
            for (size_t h = 0; h < ext.p_kw.size(); ++h) {
                const size_t idx = t0_idx + 1 + h;
                ext.p_kw[h] = external_5s && idx < external_5s->size()
                                  ? (*external_5s)[idx]
                                  : (external_5s && !external_5s->empty()
                                         ? external_5s->back()
                                         : 0.0);
            }
            extp = &ext;
        }
        const forecast::Forecast fc = forecast::gbt_predict(*model, full, rq, extp);
        const auto per = static_cast<size_t>(t_step_s / 5.0);
        for (int j = 0; j < n_steps; ++j) {
            double acc = 0.0;
            size_t cnt = 0;
            for (size_t k = 0; k < per; ++k) {
                const size_t idx = static_cast<size_t>(j) * per + k;
                if (idx < fc.p_kw.size()) {
                    acc += fc.p_kw[idx];
                    ++cnt;
                }
            }
            means[static_cast<size_t>(j)] = cnt ? acc / cnt : fc.p_kw.back();
        }
        return means;
    };
}

inline json result_json(const sim::SimResult& r, const sim::SimConfig& cfg,
                        const config::ToolkitConfig& tc, const std::string& mission_id) {
    return json{{"mission", mission_id},
                {"strategy", sim::strategy_name(cfg.strategy)},
                {"aging", plant::aging_name(cfg.aging)},
                {"h2_kg", r.h2_kg},
                {"h2_soc_corrected_kg", r.h2_soc_corrected_kg},
                {"deg_uv", r.deg_total_uv()},
                {"deg_static_uv", r.deg_static_uv},
                {"deg_dynamic_uv", r.deg_dynamic_uv},
                {"cost_eur", r.cost_eur},
                {"final_soc", r.final_soc},
                {"emergencies", r.emergencies},
                {"solver_fallbacks", r.solver_fallbacks},
                {"soc_violation_s", r.soc_violation_s},
                {"energy_gap_kwh", r.energy_gap_kwh},
                {"p_fc_ref_kw", cfg.p_fc_ref_kw > 0
                                    ? cfg.p_fc_ref_kw
                                    : 0.4 * tc.limits.p_fc_max(plant::Aging::Bol)},
                {"xi_init", cfg.xi_init}};
}

inline void write_trajectory_svg(const std::string& path, const sim::SimResult& r) {
    svg::Panel powers;
    powers.title = "Power split";
    powers.x_label = "t (s)";
    powers.y_label = "kW";
    powers.series.push_back({"load", "#444444", r.t_s, r.p_load_kw, false});
    powers.series.push_back({"fuel cell", "#d62728", r.t_s, r.p_fc_kw, false});
    powers.series.push_back({"battery", "#1f77b4", r.t_s, r.p_bat_kw, false});
    svg::Panel soc;
    soc.title = "Battery state of charge";
    soc.x_label = "t (s)";
    soc.y_label = "SoC (-)";
    soc.series.push_back({"soc", "#2ca02c", r.t_s, r.soc, false});
    svg::write_svg(path, {powers, soc});
}

} // namespace detail

// --- simulate ---------------------------------------------------------------------

inline int cmd_simulate(const CommonArgs& args) {
    try {
        config::ToolkitConfig tc = load_or_default(args.config_path);
        sim::SimConfig cfg = tc.simulation;
        detail::apply_strategy(args.strategy_override, cfg, tc.filter);
        cfg.filter = tc.filter;
        if (args.aging_override == "bol") cfg.aging = plant::Aging::Bol;
        else if (args.aging_override == "eol") cfg.aging = plant::Aging::Eol;
        else if (!args.aging_override.empty())
            throw std::invalid_argument("unknown aging '" + args.aging_override + "'");
        if (args.horizon_min > 0) {
            const double steps = args.horizon_min * 60.0 / cfg.t_mpc_s;
            cfg.n_mpc = static_cast<int>(std::lround(steps));
        }
        if (!args.forecaster_override.empty()) {
            const std::string& v = args.forecaster_override;
            if (v == "perfect") cfg.forecast = sim::ForecastMode::Perfect;
            else if (v == "persistence") cfg.forecast = sim::ForecastMode::Persistence;
            else if (v == "external") cfg.forecast = sim::ForecastMode::External;
            else if (v == "gbt" || v == "gbt+external") cfg.forecast = sim::ForecastMode::Model;
            else throw std::invalid_argument("unknown forecaster '" + v + "'");
        }

        const sim::MissionProfile mission = detail::resolve_mission(args);
        std::vector<double> external;
        if (!args.external_path.empty()) {
            external = csvio::read_external_csv(args.external_path);
            cfg.external_5s = &external;
        }
        std::shared_ptr<forecast::GbtModel> model;
        std::shared_ptr<std::vector<double>> ext_shared;
        if (cfg.forecast == sim::ForecastMode::Model) {
            if (args.model_path.empty())
                throw std::invalid_argument("data-driven forecaster requires --model");
            std::ifstream in(args.model_path);
            if (!in) throw std::runtime_error("cannot open model: " + args.model_path);
            json mj;
            in >> mj;
            model = std::make_shared<forecast::GbtModel>(forecast::gbt_from_json(mj));
            if (!external.empty())
                ext_shared = std::make_shared<std::vector<double>>(external);
            cfg.forecast_hook = detail::make_gbt_hook(model, ext_shared);
        }
        if (cfg.forecast == sim::ForecastMode::External && external.empty())
            throw std::invalid_argument("external forecaster requires --external");

        const sim::PlantSet ps = tc.plant_set();
        const sim::SimResult res = sim::run_mission(mission, cfg, ps);

        fs::create_directories(args.out_dir);
        {
            std::ofstream out(fs::path(args.out_dir) / "result.json");
            out << detail::result_json(res, cfg, tc, mission.id).dump(2) << "\n";
        }
        {
            std::ofstream out(fs::path(args.out_dir) / "run_meta.json");
            out << json{{"wall_s", res.wall_s}}.dump(2) << "\n";
        }
        csvio::write_trace_csv((fs::path(args.out_dir) / "trace.csv").string(), res);
        detail::write_trajectory_svg((fs::path(args.out_dir) / "trajectory.svg").string(),
                                     res);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        write_error_json(args.out_dir, e.what());
        return 2;
    }
}

// --- sweep ------------------------------------------------------------------------

inline std::vector<sim::MissionProfile> load_corpus(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<sim::MissionProfile> out;
    for (const auto& f : files) out.push_back(csvio::read_mission_csv(f.string(), f.stem().string()));
    return out;
}

inline std::vector<sim::StrategyVariant> standard_strategies(const config::ToolkitConfig& tc,
                                                             bool with_data_mpc,
                                                             sim::ForecastHook hook = {}) {
    std::vector<sim::StrategyVariant> out;
    sim::SimConfig base = tc.simulation;
    base.filter = tc.filter;
    {
        sim::SimConfig c = base;
        c.strategy = sim::Strategy::Filter;
        c.filter.tau_fd_s = 60.0;
        out.push_back({"filter60", c});
    }
    {
        sim::SimConfig c = base;
        c.strategy = sim::Strategy::Filter;
        c.filter.tau_fd_s = 600.0;
        out.push_back({"filter600", c});
    }
    {
        sim::SimConfig c = base;
        c.strategy = sim::Strategy::Ecms;
        out.push_back({"ecms", c});
    }
    {
        sim::SimConfig c = base;
        c.strategy = sim::Strategy::Mpc;
        c.forecast = sim::ForecastMode::Perfect;
        out.push_back({"mpc-perfect", c});
    }
    if (with_data_mpc) {
        sim::SimConfig c = base;
        c.strategy = sim::Strategy::Mpc;
        c.forecast = sim::ForecastMode::Model;
        c.forecast_hook = std::move(hook);
        out.push_back({"mpc-data", c});
    }
    return out;
}

inline void write_sweep_outputs(const std::string& out_dir, const sim::SweepResult& sr,
                                const std::vector<sim::StrategyVariant>& strategies,
                                const std::vector<plant::Aging>& agings) {
    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "sweep.csv");
        out << "mission,strategy,aging,h2_kg,h2_soc_corrected_kg,deg_uv,deg_static_uv,"
               "deg_dynamic_uv,cost_eur,duration_h,emergencies,error\n";
        size_t k = 0;
        for (size_t mi = 0; mi < sr.rows.size() / (strategies.size() * agings.size()); ++mi)
            for (size_t si = 0; si < strategies.size(); ++si)
                for (size_t ai = 0; ai < agings.size(); ++ai, ++k) {
                    const sim::SweepRow& r = sr.rows[k];
                    out << r.mission_id << ',' << strategies[si].name << ','
                        << plant::aging_name(r.aging) << ',' << csvio::format_double(r.h2_kg)
                        << ',' << csvio::format_double(r.h2_corrected_kg) << ','
                        << csvio::format_double(r.deg_uv) << ','
                        << csvio::format_double(r.deg_static_uv) << ','
                        << csvio::format_double(r.deg_dynamic_uv) << ','
                        << csvio::format_double(r.cost_eur) << ','
                        << csvio::format_double(r.duration_h) << ',' << r.emergencies << ','
                        << r.error << "\n";
                }
    }
    {
        json totals = json::array();
        size_t k = 0;
        for (size_t si = 0; si < strategies.size(); ++si)
            for (size_t ai = 0; ai < agings.size(); ++ai, ++k) {
                const sim::SweepTotals& t = sr.totals[k];
                totals.push_back({{"strategy", strategies[si].name},
                                  {"aging", plant::aging_name(t.aging)},
                                  {"h2_kg", t.h2_kg},
                                  {"h2_soc_corrected_kg", t.h2_corrected_kg},
                                  {"deg_uv", t.deg_uv},
                                  {"cost_eur", t.cost_eur},
                                  {"failures", t.failures}});
            }
        std::ofstream out(fs::path(out_dir) / "totals.json");
        out << totals.dump(2) << "\n";
    }
    {
        // Pareto scatter: H2 vs degradation per strategy/aging
        const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f"};
        svg::Panel panel;
        panel.title = "Cumulative hydrogen vs degradation";
        panel.x_label = "degradation (uV)";
        panel.y_label = "H2 (kg)";
        size_t k = 0;
        for (size_t si = 0; si < strategies.size(); ++si)
            for (size_t ai = 0; ai < agings.size(); ++ai, ++k) {
                svg::Series s;
                s.label = strategies[si].name + std::string("/") +
                          plant::aging_name(sr.totals[k].aging);
                s.color = colors[(si * agings.size() + ai) % 7];
                s.points_only = true;
                s.x.push_back(sr.totals[k].deg_uv);
                s.y.push_back(sr.totals[k].h2_corrected_kg);
                panel.series.push_back(std::move(s));
            }
        svg::write_svg((fs::path(out_dir) / "pareto.svg").string(), {panel}, 700, 420);
    }
}

inline int cmd_sweep(const CommonArgs& args) {
    try {
        config::ToolkitConfig tc = load_or_default(args.config_path);
        std::vector<sim::MissionProfile> corpus;
        if (!args.corpus_dir.empty()) corpus = load_corpus(args.corpus_dir);
        if (corpus.empty()) throw std::runtime_error("empty corpus");

        std::shared_ptr<forecast::GbtModel> model;
        sim::ForecastHook hook;
        bool with_data = !args.model_path.empty();
        if (with_data) {
            std::ifstream in(args.model_path);
            if (!in) throw std::runtime_error("cannot open model: " + args.model_path);
            json mj;
            in >> mj;
            model = std::make_shared<forecast::GbtModel>(forecast::gbt_from_json(mj));
            hook = detail::make_gbt_hook(model, nullptr);
        }
        const auto strategies = standard_strategies(tc, with_data, hook);
        const std::vector<plant::Aging> agings{plant::Aging::Bol, plant::Aging::Eol};
        const sim::SweepResult sr = sim::sweep(corpus, strategies, agings, tc.plant_set(),
                                               args.jobs);
        write_sweep_outputs(args.out_dir, sr, strategies, agings);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "sweep: " << e.what() << "\n";
        write_error_json(args.out_dir, e.what());
        return 2;
    }
}

inline int cmd_horizon(const CommonArgs& args) {
    try {
        config::ToolkitConfig tc = load_or_default(args.config_path);
        std::vector<sim::MissionProfile> corpus;
        if (!args.corpus_dir.empty()) corpus = load_corpus(args.corpus_dir);
        if (corpus.empty()) throw std::runtime_error("empty corpus");
        std::vector<double> horizons{15, 30, 45, 60};
        if (args.horizon_min > 0) horizons = {args.horizon_min};
        sim::SimConfig base = tc.simulation;
        base.filter = tc.filter;
        const auto pts =
            sim::horizon_sweep(corpus, horizons, base, tc.plant_set(), args.jobs);
        fs::create_directories(args.out_dir);
        std::ofstream out(fs::path(args.out_dir) / "horizon.csv");
        out << "horizon_min,h2_kg,h2_soc_corrected_kg,deg_uv\n";
        for (const auto& p : pts)
            out << csvio::format_double(p.horizon_min) << ','
                << csvio::format_double(p.h2_kg) << ','
                << csvio::format_double(p.h2_corrected_kg) << ','
                << csvio::format_double(p.deg_uv) << "\n";
        svg::Panel panel;
        panel.title = "Horizon sweep (perfect preview)";
        panel.x_label = "horizon (min)";
        panel.y_label = "degradation (uV)";
        svg::Series s;
        s.label = "deg";
        s.color = "#d62728";
        for (const auto& p : pts) {
            s.x.push_back(p.horizon_min);
            s.y.push_back(p.deg_uv);
        }
        panel.series.push_back(s);
        svg::write_svg((fs::path(args.out_dir) / "horizon.svg").string(), {panel}, 700, 420);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "horizon: " << e.what() << "\n";
        write_error_json(args.out_dir, e.what());
        return 2;
    }
}

// --- forecast ----------------------------------------------------------------------

struct ForecastEvalReport {
    std::map<std::string, forecast::ForecastMetrics> per_horizon;
};

inline json metrics_json(const forecast::ForecastMetrics& m) {
    json j{{"mae", m.mae_kw}, {"n", m.n}};
    j["mape"] = m.mape_pct ? json(*m.mape_pct) : json();
    j["ppmcc"] = m.ppmcc ? json(*m.ppmcc) : json();
    return j;
}

// backtest a predictor over the test split at the reporting horizons
template <typename PredictFn>
ForecastEvalReport backtest(const forecast::TimeSeriesFrame& test, double delta_plus_s,
                            double mape_floor_kw, size_t lags, PredictFn&& predict,
                            size_t stride = 12) {
    const auto H = static_cast<size_t>(delta_plus_s / forecast::kPeriodS);
    std::vector<std::pair<std::string, size_t>> horizons{{"5s", 1}, {"1min", 12},
                                                         {"15min", 180}, {"30min", 360}};
    horizons.erase(std::remove_if(horizons.begin(), horizons.end(),
                                  [&](const auto& h) { return h.second > H; }),
                   horizons.end());
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> buf;
    for (size_t t0 = lags; t0 + H < test.size(); t0 += stride) {
        const std::vector<double> pred = predict(t0);
        for (const auto& [name, steps] : horizons) {
            buf[name].first.push_back(pred[steps - 1]);
            buf[name].second.push_back(test.p_tot_kw[t0 + steps]);
        }
    }
    ForecastEvalReport rep;
    for (const auto& [name, pt] : buf)
        rep.per_horizon[name] = forecast::evaluate_metrics(pt.first, pt.second, mape_floor_kw);
    return rep;
}

inline int cmd_forecast(const std::string& mode, const CommonArgs& args) {
    try {
        config::ToolkitConfig tc = load_or_default(args.config_path);
        const forecast::TimeSeriesFrame frame = csvio::read_frame_csv(args.mission_path);
        const forecast::Split split = forecast::temporal_split(frame);
        fs::create_directories(args.out_dir);

        double mean_load = 0.0;
        for (double p : frame.p_tot_kw) mean_load += p;
        mean_load /= static_cast<double>(frame.size());
        const double mape_floor = tc.forecast.mape_floor_frac * mean_load;

        if (mode == "train") {
            std::vector<forecast::GbtHyper> grid;
            for (double dm : tc.forecast.delta_minus_grid_s)
                for (double lr : tc.forecast.learning_rates)
                    for (int nd : tc.forecast.max_depths)
                        for (double ml : tc.forecast.min_loss_reductions)
                            for (double nb : tc.forecast.row_subsamples)
                                for (double nf : tc.forecast.feature_subsamples) {
                                    forecast::GbtHyper h;
                                    h.delta_minus_s = dm;
                                    h.learning_rate = lr;
                                    h.max_depth = nd;
                                    h.min_loss_reduction = ml;
                                    h.row_subsample = nb;
                                    h.feature_subsample = nf;
                                    h.max_trees = tc.forecast.max_trees;
                                    grid.push_back(h);
                                }
            const bool with_ext = !args.external_path.empty();
            const forecast::GbtModel model = forecast::gbt_fit(
                split.train, split.validation, grid, tc.forecast.delta_plus_s, with_ext,
                args.seed);
            std::ofstream out(fs::path(args.out_dir) / "model.json");
            out << forecast::gbt_to_json(model).dump() << "\n";
            return 0;
        }
        if (mode != "eval") throw std::invalid_argument("forecast mode must be train|eval");

        if (!forecast::audit_no_leakage(forecast::FeatureSchema{12, false})) {
            std::cerr << "forecast: leakage audit failed\n";
            return 3;
        }

        json out_j;
        const std::string fc_kind =
            args.forecaster_override.empty() ? "gbt" : args.forecaster_override;
        std::vector<double> external;
        if (!args.external_path.empty()) external = csvio::read_external_csv(args.external_path);

        auto eval_and_plot = [&](const std::string& name, auto&& predict, size_t lags) {
            const ForecastEvalReport rep = backtest(
                split.test, tc.forecast.delta_plus_s, mape_floor, lags, predict);
            json jm;
            for (const auto& [h, m] : rep.per_horizon) jm[h] = metrics_json(m);
            out_j[name] = jm;
            // overlay plot at the first viable t0
            const size_t t0 = std::min(split.test.size() - 1,
                                       lags + static_cast<size_t>(16));
            const std::vector<double> pred = predict(t0);
            svg::Panel panel;
            panel.title = name + ": predicted vs real";
            panel.x_label = "step (5 s)";
            panel.y_label = "p_tot (kW)";
            svg::Series truth, fcst;
            truth.label = "real";
            truth.color = "#444444";
            fcst.label = "predicted";
            fcst.color = "#d62728";
            for (size_t h = 0; h < pred.size() && t0 + 1 + h < split.test.size(); ++h) {
                truth.x.push_back(static_cast<double>(h));
                truth.y.push_back(split.test.p_tot_kw[t0 + 1 + h]);
                fcst.x.push_back(static_cast<double>(h));
                fcst.y.push_back(pred[h]);
            }
            panel.series.push_back(truth);
            panel.series.push_back(fcst);
            svg::write_svg((fs::path(args.out_dir) / (name + "_overlay.svg")).string(),
                           {panel}, 800, 320);
        };

        if (fc_kind == "persistence") {
            eval_and_plot("persistence",
                          [&](size_t t0) {
                              forecast::ForecastRequest rq;
                              rq.t0_idx = t0;
                              rq.delta_plus_s = tc.forecast.delta_plus_s;
                              return forecast::persistence_forecast(split.test, rq).p_kw;
                          },
                          1);
        } else if (fc_kind == "ar") {
            const forecast::ArModel am = forecast::ar_fit(split.train, 12, tc.forecast.ar_ridge);
            eval_and_plot("ar",
                          [&](size_t t0) {
                              forecast::ForecastRequest rq;
                              rq.t0_idx = t0;
                              rq.delta_minus_s = 60.0;
                              rq.delta_plus_s = tc.forecast.delta_plus_s;
                              return forecast::ar_predict(am, split.test, rq).p_kw;
                          },
                          12);
        } else if (fc_kind == "external") {
            if (external.empty()) throw std::invalid_argument("external eval requires --external");
            const auto H = static_cast<size_t>(tc.forecast.delta_plus_s / forecast::kPeriodS);
            eval_and_plot("external",
                          [&](size_t t0) {
                              std::vector<double> p(H);
                              for (size_t h = 0; h < H; ++h)
                                  p[h] = t0 + 1 + h < external.size() ? external[t0 + 1 + h]
                                                                      : external.back();
                              return p;
                          },
                          1);
        } else {
            if (args.model_path.empty())
                throw std::invalid_argument("gbt eval requires --model");
            std::ifstream in(args.model_path);
            if (!in) throw std::runtime_error("cannot open model: " + args.model_path);
            json mj;
            in >> mj;
            const forecast::GbtModel model = forecast::gbt_from_json(mj);
            eval_and_plot("gbt",
                          [&](size_t t0) {
                              forecast::ForecastRequest rq;
                              rq.t0_idx = t0;
                              rq.delta_minus_s = model.hyper.delta_minus_s;
                              rq.delta_plus_s = tc.forecast.delta_plus_s;
                              forecast::Forecast ext;
                              const forecast::Forecast* extp = nullptr;
                              if (model.schema.with_external) {
                                  ext.p_kw.resize(rq.horizon_steps());
                                  for (size_t h = 0; h < ext.p_kw.size(); ++h)
                                      ext.p_kw[h] = t0 + 1 + h < external.size()
                                                        ? external[t0 + 1 + h]
                                                        : 0.0;
                                  extp = &ext;
                              }
                              return forecast::gbt_predict(model, split.test, rq, extp).p_kw;
                          },
                          model.schema.lags);
        }
        std::ofstream out(fs::path(args.out_dir) / "metrics.json");
        out << out_j.dump(2) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "forecast: " << e.what() << "\n";
        write_error_json(args.out_dir, e.what());
        return 2;
    }
}

// --- gen ----------------------------------------------------------------------------

inline int cmd_gen(const CommonArgs& args, int count = 1) {
    try {
        fs::create_directories(args.out_dir);
        for (int k = 0; k < count; ++k) {
            const uint64_t seed = args.seed + static_cast<uint64_t>(k);
            const sim::MissionProfile m =
                sim::generate_synthetic_mission(seed, args.hours * 3600.0);
            char name[64];
            std::snprintf(name, sizeof name, "mission_%04llu.csv",
                          static_cast<unsigned long long>(seed));
            csvio::write_mission_csv((fs::path(args.out_dir) / name).string(), m);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "gen: " << e.what() << "\n";
        write_error_json(args.out_dir, e.what());
        return 2;
    }
}

// --- config -------------------------------------------------------------------------

inline int cmd_config(const std::string& what, const std::string& out_path) {
    try {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        if (what == "defaults") out << config::default_config_json().dump(2) << "\n";
        else if (what == "reference") out << config::config_reference_markdown();
        else throw std::invalid_argument("config mode must be defaults|reference");
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 2;
    }
}

} // namespace hems::app
