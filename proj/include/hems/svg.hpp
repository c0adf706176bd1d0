#pragma once

// Minimal self-contained SVG line plots for trajectory and scatter output.
// Presentation only; no external renderer involved.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace hems::svg {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x, y;
    bool points_only = false;
};

struct Panel {
    std::string title, x_label, y_label;
    std::vector<Series> series;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline void render_panel(std::ostream& os, const Panel& p, double x0, double y0, double w,
                         double h) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Series& s : p.series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    const double pad_y = 0.05 * (ymax - ymin);
    ymin -= pad_y;
    ymax += pad_y;
    const double ml = 70, mb = 40, mt = 28, mr = 12;
    const double pw = w - ml - mr, ph = h - mt - mb;
    auto sx = [&](double x) { return x0 + ml + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return y0 + mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    os << "<rect x='" << x0 + ml << "' y='" << y0 + mt << "' width='" << pw << "' height='"
       << ph << "' fill='none' stroke='#888'/>\n";
    os << "<text x='" << x0 + ml << "' y='" << y0 + 18 << "' font-size='13' font-family='sans-serif'>"
       << p.title << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double yv = ymin + (ymax - ymin) * k / 4.0;
        const double xv = xmin + (xmax - xmin) * k / 4.0;
        os << "<text x='" << x0 + ml - 6 << "' y='" << sy(yv) + 4
           << "' font-size='10' text-anchor='end' font-family='sans-serif'>" << fmt(yv)
           << "</text>\n";
        os << "<text x='" << sx(xv) << "' y='" << y0 + mt + ph + 14
           << "' font-size='10' text-anchor='middle' font-family='sans-serif'>" << fmt(xv)
           << "</text>\n";
        os << "<line x1='" << x0 + ml << "' y1='" << sy(yv) << "' x2='" << x0 + ml + pw
           << "' y2='" << sy(yv) << "' stroke='#eee'/>\n";
    }
    os << "<text x='" << x0 + ml + pw / 2 << "' y='" << y0 + mt + ph + 30
       << "' font-size='11' text-anchor='middle' font-family='sans-serif'>" << p.x_label
       << "</text>\n";
    os << "<text x='" << x0 + 14 << "' y='" << y0 + mt + ph / 2
       << "' font-size='11' text-anchor='middle' font-family='sans-serif' transform='rotate(-90 "
       << x0 + 14 << " " << y0 + mt + ph / 2 << ")'>" << p.y_label << "</text>\n";

    double lx = x0 + ml + 8, ly = y0 + mt + 14;
    for (const Series& s : p.series) {
        if (s.points_only) {
            for (size_t i = 0; i < s.x.size(); ++i)
                os << "<circle cx='" << sx(s.x[i]) << "' cy='" << sy(s.y[i])
                   << "' r='3' fill='" << s.color << "' fill-opacity='0.7'/>\n";
        } else {
            os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.2' points='";
            for (size_t i = 0; i < s.x.size(); ++i)
                os << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i])) << ' ';
            os << "'/>\n";
        }
        if (!s.label.empty()) {
            os << "<rect x='" << lx << "' y='" << ly - 9 << "' width='10' height='10' fill='"
               << s.color << "'/>\n";
            os << "<text x='" << lx + 14 << "' y='" << ly
               << "' font-size='11' font-family='sans-serif'>" << s.label << "</text>\n";
            ly += 16;
        }
    }
}

} // namespace detail

inline void write_svg(const std::string& path, const std::vector<Panel>& panels,
                      double width = 900, double panel_height = 260) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const double total_h = panel_height * static_cast<double>(panels.size());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << total_h << "' viewBox='0 0 " << width << ' ' << total_h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    for (size_t i = 0; i < panels.size(); ++i)
        detail::render_panel(out, panels[i], 0, panel_height * static_cast<double>(i), width,
                             panel_height);
    out << "</svg>\n";
}

} // namespace hems::svg
