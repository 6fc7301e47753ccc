#pragma once

// Minimal static SVG line charts for the benchmark harness.  CSV remains the
// authoritative artifact; these plots are a convenience.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "savint/csv.hpp"

namespace savint {

struct SvgSeries {
    std::string label;
    std::vector<std::array<double, 2>> points;  // (x, y)
};

struct SvgChart {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool logx = false;
    bool logy = false;
    std::vector<SvgSeries> series;
};

namespace detail {

inline const char* svg_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[i % 8];
}

inline std::string svg_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

}  // namespace detail

inline std::string render_svg(const SvgChart& chart) {
    const double width = 800, height = 560;
    const double ml = 80, mr = 180, mt = 50, mb = 60;
    const double pw = width - ml - mr, ph = height - mt - mb;

    auto tx = [&](double x) { return chart.logx ? std::log10(x) : x; };
    auto ty = [&](double y) { return chart.logy ? std::log10(y) : y; };

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const SvgSeries& s : chart.series)
        for (const auto& p : s.points) {
            if (chart.logx && p[0] <= 0.0) continue;
            if (chart.logy && p[1] <= 0.0) continue;
            xmin = std::min(xmin, tx(p[0]));
            xmax = std::max(xmax, tx(p[0]));
            ymin = std::min(ymin, ty(p[1]));
            ymax = std::max(ymax, ty(p[1]));
        }
    if (xmin > xmax) {
        xmin = 0.0;
        xmax = 1.0;
    }
    if (ymin > ymax) {
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }

    auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - (ty(y) - ymin) / (ymax - ymin) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"560\" "
           "viewBox=\"0 0 800 560\">\n";
    out += "<rect width=\"800\" height=\"560\" fill=\"white\"/>\n";
    out += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"17\" "
           "font-family=\"sans-serif\">" + chart.title + "</text>\n";

    // frame
    out += "<rect x=\"" + detail::svg_num(ml) + "\" y=\"" + detail::svg_num(mt) +
           "\" width=\"" + detail::svg_num(pw) + "\" height=\"" + detail::svg_num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";

    // ticks at integer decades on log axes, five even ticks otherwise
    auto tick_values = [](double lo, double hi, bool log_axis) {
        std::vector<double> ticks;
        if (log_axis) {
            for (double d = std::ceil(lo); d <= std::floor(hi) + 1e-12; d += 1.0)
                ticks.push_back(d);
            if (ticks.size() > 12) {
                std::vector<double> sparse;
                const std::size_t stride = (ticks.size() + 11) / 12;
                for (std::size_t i = 0; i < ticks.size(); i += stride)
                    sparse.push_back(ticks[i]);
                return sparse;
            }
            if (!ticks.empty()) return ticks;
        }
        for (int i = 0; i <= 4; ++i) ticks.push_back(lo + (hi - lo) * i / 4.0);
        return ticks;
    };

    for (double t : tick_values(xmin, xmax, chart.logx)) {
        const double x = ml + (t - xmin) / (xmax - xmin) * pw;
        out += "<line x1=\"" + detail::svg_num(x) + "\" y1=\"" + detail::svg_num(mt + ph) +
               "\" x2=\"" + detail::svg_num(x) + "\" y2=\"" +
               detail::svg_num(mt + ph + 5) + "\" stroke=\"black\"/>\n";
        char lbl[32];
        if (chart.logx)
            std::snprintf(lbl, sizeof(lbl), "1e%g", t);
        else
            std::snprintf(lbl, sizeof(lbl), "%.3g", t);
        out += "<text x=\"" + detail::svg_num(x) + "\" y=\"" +
               detail::svg_num(mt + ph + 20) +
               "\" text-anchor=\"middle\" font-size=\"12\" "
               "font-family=\"sans-serif\">" + lbl + "</text>\n";
    }
    for (double t : tick_values(ymin, ymax, chart.logy)) {
        const double y = mt + ph - (t - ymin) / (ymax - ymin) * ph;
        out += "<line x1=\"" + detail::svg_num(ml - 5) + "\" y1=\"" + detail::svg_num(y) +
               "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(y) +
               "\" stroke=\"black\"/>\n";
        char lbl[32];
        if (chart.logy)
            std::snprintf(lbl, sizeof(lbl), "1e%g", t);
        else
            std::snprintf(lbl, sizeof(lbl), "%.3g", t);
        out += "<text x=\"" + detail::svg_num(ml - 8) + "\" y=\"" +
               detail::svg_num(y + 4) +
               "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" +
               lbl + "</text>\n";
    }

    out += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" +
           detail::svg_num(height - 15) +
           "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">" +
           chart.xlabel + "</text>\n";
    out += "<text x=\"20\" y=\"" + detail::svg_num(mt + ph / 2) +
           "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 20 " + detail::svg_num(mt + ph / 2) + ")\">" +
           chart.ylabel + "</text>\n";

    for (std::size_t si = 0; si < chart.series.size(); ++si) {
        const SvgSeries& s = chart.series[si];
        std::string pts;
        for (const auto& p : s.points) {
            if (chart.logx && p[0] <= 0.0) continue;
            if (chart.logy && p[1] <= 0.0) continue;
            pts += detail::svg_num(px(p[0])) + "," + detail::svg_num(py(p[1])) + " ";
        }
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
               detail::svg_color(si) + "\" stroke-width=\"1.5\"/>\n";

        const double ly = mt + 18.0 * double(si);
        out += "<line x1=\"" + detail::svg_num(ml + pw + 12) + "\" y1=\"" +
               detail::svg_num(ly) + "\" x2=\"" + detail::svg_num(ml + pw + 36) +
               "\" y2=\"" + detail::svg_num(ly) + "\" stroke=\"" +
               detail::svg_color(si) + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + detail::svg_num(ml + pw + 42) + "\" y=\"" +
               detail::svg_num(ly + 4) +
               "\" font-size=\"12\" font-family=\"sans-serif\">" + s.label +
               "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

inline void write_svg(const SvgChart& chart, const std::string& path) {
    write_text_file(path, render_svg(chart));
}

}  // namespace savint
