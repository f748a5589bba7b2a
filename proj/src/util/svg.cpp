// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/util/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sld/util/error.hpp"

namespace sld::svg {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 55;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string f(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string header(const std::string& title) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(kWidth) + "\" height=\"" + f(kHeight) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
           "<text x=\"" + f(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
           "</text>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", double rotate = 0) {
    std::string out = "<text x=\"" + f(x) + "\" y=\"" + f(y) + "\" text-anchor=\"" + anchor + "\"";
    if (rotate != 0) {
        out += " transform=\"rotate(" + f(rotate) + " " + f(x) + " " + f(y) + ")\"";
    }
    return out + ">" + escape(s) + "</text>\n";
}

}  // namespace

std::string render(const LineChart& chart) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : chart.series) {
        if (s.x.size() != s.y.size()) {
            throw Error("svg: series '" + s.name + "' has mismatched x/y lengths");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double xv = chart.log_x ? std::log10(s.x[i]) : s.x[i];
            x0 = std::min(x0, xv);
            x1 = std::max(x1, xv);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!(x1 >= x0)) {
        x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    }
    if (x1 == x0) {
        x1 = x0 + 1;
    }
    if (y1 == y0) {
        y1 = y0 + 1;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + ((chart.log_x ? std::log10(x) : x) - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::string out = header(chart.title);
    out += "<rect x=\"" + f(kLeft) + "\" y=\"" + f(kTop) + "\" width=\"" + f(pw) + "\" height=\"" + f(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double yv = y0 + (y1 - y0) * i / 4.0;
        out += text(kLeft - 6, py(yv) + 4, g(yv), "end");
        const double xv = x0 + (x1 - x0) * i / 4.0;
        const double xlab = chart.log_x ? std::pow(10.0, xv) : xv;
        out += text(kLeft + pw * i / 4.0, kTop + ph + 16, g(xlab));
    }
    out += text(kLeft + pw / 2, kHeight - 12, chart.x_label + (chart.log_x ? " (log)" : ""));
    out += text(18, kTop + ph / 2, chart.y_label, "middle", -90);
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            pts += f(px(s.x[i])) + "," + f(py(s.y[i])) + " ";
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts +
               "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out += "<circle cx=\"" + f(px(s.x[i])) + "\" cy=\"" + f(py(s.y[i])) + "\" r=\"2.5\" fill=\"" + color +
                   "\"/>\n";
        }
        const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
        out += "<line x1=\"" + f(kWidth - kRight + 10) + "\" y1=\"" + f(ly - 4) + "\" x2=\"" +
               f(kWidth - kRight + 30) + "\" y2=\"" + f(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        out += text(kWidth - kRight + 35, ly, s.name, "start");
    }
    return out + "</svg>\n";
}

std::string render(const Heatmap& map) {
    const std::size_t rows = map.values.size();
    const std::size_t cols = rows ? map.values[0].size() : 0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : map.values) {
        if (r.size() != cols) {
            throw Error("svg: ragged heatmap");
        }
        for (double v : r) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(hi > lo)) {
        hi = lo + 1;
    }
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const double cw = cols ? pw / static_cast<double>(cols) : pw;
    const double ch = rows ? ph / static_cast<double>(rows) : ph;
    std::string out = header(map.title);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double t = (map.values[i][j] - lo) / (hi - lo);
            const int red = static_cast<int>(255 * t);
            const int blue = static_cast<int>(255 * (1 - t));
            char color[16];
            std::snprintf(color, sizeof color, "#%02x40%02x", red, blue);
            const double x = kLeft + cw * static_cast<double>(j);
            const double y = kTop + ch * static_cast<double>(i);
            out += "<rect x=\"" + f(x) + "\" y=\"" + f(y) + "\" width=\"" + f(cw) + "\" height=\"" + f(ch) +
                   "\" fill=\"" + color + "\"/>\n";
            out += text(x + cw / 2, y + ch / 2 + 4, g(map.values[i][j]));
        }
    }
    for (std::size_t j = 0; j < cols && j < map.x_ticks.size(); ++j) {
        out += text(kLeft + cw * (static_cast<double>(j) + 0.5), kTop + ph + 16, map.x_ticks[j]);
    }
    for (std::size_t i = 0; i < rows && i < map.y_ticks.size(); ++i) {
        out += text(kLeft - 6, kTop + ch * (static_cast<double>(i) + 0.5) + 4, map.y_ticks[i], "end");
    }
    out += text(kLeft + pw / 2, kHeight - 12, map.x_label);
    out += text(18, kTop + ph / 2, map.y_label, "middle", -90);
    out += text(kWidth - kRight + 20, kTop + 14, "min " + g(lo), "start");
    out += text(kWidth - kRight + 20, kTop + 32, "max " + g(hi), "start");
    return out + "</svg>\n";
}

}  // namespace sld::svg
