#pragma once

// CSV ingestion/emission for mission frames, external forecasts, and traces.
// Frame schema: t_s,p_tot_kw,v_kn,n_prop_s_rpm,n_prop_p_rpm,delta_s_deg,delta_p_deg
// Gaps up to 3 samples are linearly interpolated; longer gaps split segments.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hems/forecast.hpp"
#include "hems/sim.hpp"

namespace hems::csvio {

inline constexpr const char* kFrameHeader =
    "t_s,p_tot_kw,v_kn,n_prop_s_rpm,n_prop_p_rpm,delta_s_deg,delta_p_deg";

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline forecast::TimeSeriesFrame read_frame_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open frame CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty frame CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kFrameHeader)
        throw std::runtime_error("frame CSV header mismatch in " + path + "; expected " +
                                 kFrameHeader);
    forecast::TimeSeriesFrame f;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> cols = split_line(line);
        if (cols.size() != 7)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 7 columns");
        double v[7];
        for (int i = 0; i < 7; ++i) {
            try {
                v[i] = std::stod(cols[static_cast<size_t>(i)]);
            } catch (...) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": bad number '" + cols[static_cast<size_t>(i)] + "'");
            }
        }
        if (!f.t_s.empty()) {
            const double gap = v[0] - f.t_s.back();
            const double per = f.period_s;
            if (gap <= 0)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": timestamps must increase");
            const auto missing = static_cast<long>(std::lround(gap / per)) - 1;
            if (std::abs(gap - (missing + 1) * per) > 1e-6)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": timestamp off the 5 s grid");
            if (missing > 0 && missing <= 3) {
                const size_t i0 = f.size() - 1;
                for (long k = 1; k <= missing; ++k) {
                    const double w = static_cast<double>(k) / (missing + 1);
                    f.t_s.push_back(f.t_s[i0] + k * per);
                    auto lerp = [&](std::vector<double>& col, double next) {
                        col.push_back((1 - w) * col[i0] + w * next);
                    };
                    lerp(f.p_tot_kw, v[1]);
                    lerp(f.v_kn, v[2]);
                    lerp(f.n_prop_s_rpm, v[3]);
                    lerp(f.n_prop_p_rpm, v[4]);
                    lerp(f.delta_s_deg, v[5]);
                    lerp(f.delta_p_deg, v[6]);
                }
            } else if (missing > 3) {
                f.segment_starts.push_back(f.size());
            }
        }
        f.t_s.push_back(v[0]);
        f.p_tot_kw.push_back(v[1]);
        f.v_kn.push_back(v[2]);
        f.n_prop_s_rpm.push_back(v[3]);
        f.n_prop_p_rpm.push_back(v[4]);
        f.delta_s_deg.push_back(v[5]);
        f.delta_p_deg.push_back(v[6]);
    }
    if (f.size() == 0) throw std::runtime_error("frame CSV has no rows: " + path);
    f.validate();
    return f;
}

inline void write_frame_csv(const std::string& path, const forecast::TimeSeriesFrame& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << kFrameHeader << "\n";
    for (size_t i = 0; i < f.size(); ++i)
        out << format_double(f.t_s[i]) << ',' << format_double(f.p_tot_kw[i]) << ','
            << format_double(f.v_kn[i]) << ',' << format_double(f.n_prop_s_rpm[i]) << ','
            << format_double(f.n_prop_p_rpm[i]) << ',' << format_double(f.delta_s_deg[i])
            << ',' << format_double(f.delta_p_deg[i]) << "\n";
}

inline sim::MissionProfile mission_from_frame(const forecast::TimeSeriesFrame& f,
                                              const std::string& id) {
    sim::MissionProfile m;
    m.id = id;
    m.source_period_s = f.period_s;
    m.p_load_kw = f.p_tot_kw;
    m.v_kn = f.v_kn;
    m.n_prop_s_rpm = f.n_prop_s_rpm;
    m.n_prop_p_rpm = f.n_prop_p_rpm;
    m.delta_s_deg = f.delta_s_deg;
    m.delta_p_deg = f.delta_p_deg;
    m.build_1s();
    return m;
}

inline sim::MissionProfile read_mission_csv(const std::string& path, const std::string& id) {
    return mission_from_frame(read_frame_csv(path), id);
}

inline void write_mission_csv(const std::string& path, const sim::MissionProfile& m) {
    write_frame_csv(path, forecast::TimeSeriesFrame::from_mission(m));
}

// external forecast series: `t_s,p_tot_kw` at 5 s
inline std::vector<double> read_external_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open external forecast CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_s,p_tot_kw")
        throw std::runtime_error("external CSV header mismatch in " + path);
    std::vector<double> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split_line(line);
        if (cols.size() != 2) throw std::runtime_error("external CSV: expected 2 columns");
        out.push_back(std::stod(cols[1]));
    }
    return out;
}

inline void write_trace_csv(const std::string& path, const sim::SimResult& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "t_s,p_load_kw,p_fc_kw,p_bat_kw,soc,u_kw_s\n";
    for (size_t i = 0; i < r.t_s.size(); ++i)
        out << format_double(r.t_s[i]) << ',' << format_double(r.p_load_kw[i]) << ','
            << format_double(r.p_fc_kw[i]) << ',' << format_double(r.p_bat_kw[i]) << ','
            << format_double(r.soc[i]) << ',' << format_double(r.u_kw_s[i]) << "\n";
}

} // namespace hems::csvio
