#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cldbs/control.hpp"
#include "cldbs/experiments.hpp"

namespace cldbs {

// ---------------------------------------------------------------------------
// Static SVG export of trace line plots and comparison bar charts. Text-only
// output keeps the figures diffable and dependency-free.

namespace detail {

struct SvgCanvas {
    static constexpr int width = 960;
    static constexpr int height = 480;
    static constexpr int margin_left = 70;
    static constexpr int margin_right = 20;
    static constexpr int margin_top = 40;
    static constexpr int margin_bottom = 50;

    std::string body;
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

    double px(double x) const {
        return margin_left + (x - x_min) / (x_max - x_min) * (width - margin_left - margin_right);
    }
    double py(double y) const {
        return height - margin_bottom -
               (y - y_min) / (y_max - y_min) * (height - margin_top - margin_bottom);
    }

    void add(const std::string& s) { body += s; }

    void addf(const char* fmt, auto... args) {
        char buf[512];
        std::snprintf(buf, sizeof(buf), fmt, args...);
        body += buf;
    }

    void frame(const std::string& title, const std::string& x_label, const std::string& y_label) {
        addf("<rect x='%d' y='%d' width='%d' height='%d' fill='none' stroke='#333'/>\n",
             margin_left, margin_top, width - margin_left - margin_right,
             height - margin_top - margin_bottom);
        addf("<text x='%d' y='24' font-size='16' text-anchor='middle'>%s</text>\n", width / 2,
             title.c_str());
        addf("<text x='%d' y='%d' font-size='13' text-anchor='middle'>%s</text>\n", width / 2,
             height - 12, x_label.c_str());
        addf("<text x='16' y='%d' font-size='13' text-anchor='middle' "
             "transform='rotate(-90 16 %d)'>%s</text>\n",
             height / 2, height / 2, y_label.c_str());
        for (int i = 0; i <= 4; ++i) {
            const double xv = x_min + (x_max - x_min) * i / 4.0;
            const double yv = y_min + (y_max - y_min) * i / 4.0;
            addf("<text x='%.1f' y='%d' font-size='11' text-anchor='middle'>%.4g</text>\n", px(xv),
                 height - margin_bottom + 16, xv);
            addf("<text x='%d' y='%.1f' font-size='11' text-anchor='end'>%.4g</text>\n",
                 margin_left - 6, py(yv) + 4, yv);
        }
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("plot: cannot write " + path.string());
        out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
            << "' viewBox='0 0 " << width << " " << height << "'>\n"
            << "<rect width='100%' height='100%' fill='white'/>\n"
            << body << "</svg>\n";
    }
};

/// Envelope decimation: per time bucket keep the min and max samples, so the
/// polyline stays faithful at plot resolution.
inline std::vector<std::pair<double, double>> decimate(const TimeSeries& x,
                                                       std::size_t max_points = 2000) {
    std::vector<std::pair<double, double>> pts;
    if (x.empty()) return pts;
    if (x.size() <= max_points) {
        for (std::size_t i = 0; i < x.size(); ++i) pts.emplace_back(x.time_at(i), x.samples[i]);
        return pts;
    }
    const std::size_t bucket = (x.size() + max_points / 2 - 1) / (max_points / 2);
    for (std::size_t start = 0; start < x.size(); start += bucket) {
        const std::size_t end = std::min(start + bucket, x.size());
        std::size_t imin = start, imax = start;
        for (std::size_t i = start; i < end; ++i) {
            if (x.samples[i] < x.samples[imin]) imin = i;
            if (x.samples[i] > x.samples[imax]) imax = i;
        }
        if (imin <= imax) {
            pts.emplace_back(x.time_at(imin), x.samples[imin]);
            if (imax != imin) pts.emplace_back(x.time_at(imax), x.samples[imax]);
        } else {
            pts.emplace_back(x.time_at(imax), x.samples[imax]);
            pts.emplace_back(x.time_at(imin), x.samples[imin]);
        }
    }
    return pts;
}

inline void render_series(const TimeSeries& x, const std::string& title,
                          const std::string& y_label, const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, double>>& target_lines = {}) {
    if (x.empty()) throw std::invalid_argument("plot: empty series");
    SvgCanvas c;
    const auto pts = decimate(x);
    c.x_min = pts.front().first;
    c.x_max = std::max(pts.back().first, c.x_min + 1e-12);
    double lo = pts.front().second, hi = lo;
    for (const auto& [t, v] : pts) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (const auto& [name, v] : target_lines) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    c.y_min = lo - pad;
    c.y_max = hi + pad;
    c.frame(title, "time (s)", y_label);

    std::string poly = "<polyline fill='none' stroke='#1f77b4' stroke-width='1' points='";
    char buf[64];
    for (const auto& [t, v] : pts) {
        std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", c.px(t), c.py(v));
        poly += buf;
    }
    poly += "'/>\n";
    c.add(poly);

    for (const auto& [name, v] : target_lines) {
        c.addf("<line x1='%d' y1='%.1f' x2='%d' y2='%.1f' stroke='#d62728' "
               "stroke-dasharray='6,4'/>\n",
               SvgCanvas::margin_left, c.py(v), SvgCanvas::width - SvgCanvas::margin_right,
               c.py(v));
        c.addf("<text x='%d' y='%.1f' font-size='11' fill='#d62728'>%s = %.5g</text>\n",
               SvgCanvas::margin_left + 8, c.py(v) - 4, name.c_str(), v);
    }
    c.save(path);
}

inline void render_bars(const std::vector<std::pair<std::string, double>>& bars,
                        const std::string& title, const std::string& y_label,
                        const std::filesystem::path& path) {
    if (bars.empty()) throw std::invalid_argument("plot: empty comparison table");
    SvgCanvas c;
    double hi = 0.0, lo = 0.0;
    for (const auto& [name, v] : bars) {
        if (std::isfinite(v)) {
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
    }
    if (hi == lo) hi = lo + 1.0;
    c.y_min = lo;
    c.y_max = hi * 1.1;
    c.x_min = 0.0;
    c.x_max = 1.0;
    c.frame(title, "", y_label);

    const double span = SvgCanvas::width - SvgCanvas::margin_left - SvgCanvas::margin_right;
    const double slot = span / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto& [name, v] = bars[i];
        const double value = std::isfinite(v) ? v : 0.0;
        const double x = SvgCanvas::margin_left + slot * (static_cast<double>(i) + 0.25);
        const double y = c.py(std::max(value, 0.0));
        const double y0 = c.py(std::min(value, 0.0));
        c.addf("<rect x='%.1f' y='%.1f' width='%.1f' height='%.1f' fill='#1f77b4'/>\n", x, y,
               slot * 0.5, std::max(1.0, y0 - y));
        c.addf("<text x='%.1f' y='%d' font-size='12' text-anchor='middle'>%s</text>\n",
               x + slot * 0.25, SvgCanvas::height - SvgCanvas::margin_bottom + 30, name.c_str());
        c.addf("<text x='%.1f' y='%.1f' font-size='11' text-anchor='middle'>%s</text>\n",
               x + slot * 0.25, y - 5, std::isfinite(v) ? std::to_string(v).substr(0, 6).c_str()
                                                        : "n/a");
    }
    c.save(path);
}

}  // namespace detail

/// One SVG per trace column; the ARV plot carries the configured target lines.
inline std::vector<std::filesystem::path> render_trace_plots(const SimulationTrace& trace,
                                                             const std::filesystem::path& out_dir,
                                                             double t_up = 0.0,
                                                             double t_low = 0.0) {
    if (!trace.aligned()) throw std::invalid_argument("render_trace_plots: misaligned trace");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> files;

    const double up = t_up > 0.0 ? t_up : trace.meta.b_target;
    const double low = t_low > 0.0 ? t_low : trace.meta.t_low;
    std::vector<std::pair<std::string, double>> targets;
    if (up > 0.0) targets.emplace_back("upper target", up);
    if (low > 0.0) targets.emplace_back("lower target", low);

    struct Item {
        const TimeSeries* series;
        const char* name;
        const char* title;
        const char* y_label;
        bool with_targets;
    };
    const Item items[5] = {
        {&trace.lfp_raw, "lfp_raw.svg", "Raw LFP", "LFP (uV)", false},
        {&trace.lfp_beta, "lfp_beta.svg", "Beta-band LFP", "LFP (uV)", false},
        {&trace.beta_arv, "beta_arv.svg", "Beta ARV", "ARV (uV)", true},
        {&trace.dbs_amplitude, "dbs_amplitude.svg", "Commanded DBS amplitude", "I (mA)", false},
        {&trace.dbs_current, "dbs_current.svg", "Instantaneous DBS current", "I (mA)", false},
    };
    for (const Item& it : items) {
        const auto path = out_dir / it.name;
        detail::render_series(*it.series, it.title, it.y_label, path,
                              it.with_targets ? targets
                                              : std::vector<std::pair<std::string, double>>{});
        files.push_back(path);
    }
    return files;
}

/// Bar charts of the three comparison quantities, averaged across seeds.
inline std::vector<std::filesystem::path> render_comparison_plots(
    const ComparisonResult& result, const std::filesystem::path& out_dir) {
    if (result.rows.empty()) throw std::invalid_argument("render_comparison_plots: empty table");
    std::filesystem::create_directories(out_dir);

    const std::vector<std::string> order = {"dbs_off", "open_loop", "onoff_lif", "dual_lif"};
    auto mean_of = [&](auto getter) {
        std::vector<std::pair<std::string, double>> bars;
        for (const std::string& id : order) {
            double acc = 0.0;
            int n = 0;
            for (const ComparisonRow& r : result.rows) {
                if (r.controller == id && std::isfinite(getter(r))) {
                    acc += getter(r);
                    ++n;
                }
            }
            if (n > 0) bars.emplace_back(id, acc / n);
        }
        return bars;
    };

    std::vector<std::filesystem::path> files;
    files.push_back(out_dir / "mse_pct.svg");
    detail::render_bars(mean_of([](const ComparisonRow& r) { return r.mse_pct; }),
                        "Tracking error vs DBS-off baseline", "MSE (%)", files.back());
    files.push_back(out_dir / "power_pct.svg");
    detail::render_bars(mean_of([](const ComparisonRow& r) { return r.power_pct; }),
                        "Mean power vs 2.5 mA open loop", "power (%)", files.back());
    files.push_back(out_dir / "efficiency.svg");
    detail::render_bars(mean_of([](const ComparisonRow& r) { return r.efficiency_std; }),
                        "Suppression efficiency", "%/uW", files.back());
    return files;
}

}  // namespace cldbs
