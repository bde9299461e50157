// Copyright 2026 The qsl-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal self-contained SVG charts: line series, scatter points, error bars
// and labelled vertical markers on linear axes.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace qsl::lab::svg {

enum class Style { line, scatter };

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> error;  // empty, or one half-width per point
    std::string color = "#1f77b4";
    Style style = Style::line;
};

struct Marker {
    std::string label;
    double x = 0.0;
    std::string color = "#555555";
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<Marker> markers;
    double width = 640.0;
    double height = 420.0;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double pad = 0.04 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

}  // namespace detail

/// Renders the chart body as a <g> translated to (x0, y0).
inline std::string render_group(const Chart& chart, double x0, double y0) {
    using detail::num;
    const double left = 64.0;
    const double right = 150.0;
    const double top = 36.0;
    const double bottom = 48.0;
    const double pw = chart.width - left - right;
    const double ph = chart.height - top - bottom;

    detail::Range xr;
    detail::Range yr;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xr.include(s.x[i]);
            const double e = i < s.error.size() ? s.error[i] : 0.0;
            yr.include(s.y[i] - e);
            yr.include(s.y[i] + e);
        }
    }
    for (const auto& m : chart.markers) xr.include(m.x);
    xr.finish();
    yr.finish();
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

    std::string out = "<g transform=\"translate(" + num(x0) + "," + num(y0) + ")\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + num(chart.width) + "\" height=\"" + num(chart.height) +
           "\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(left + pw / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" +
           detail::escape(chart.title) + "</text>\n";
    out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / 5.0;
        const double yv = yr.lo + (yr.hi - yr.lo) * i / 5.0;
        out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(top + ph + 16) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + detail::tick(xv) + "</text>\n";
        out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(yv) + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
               detail::tick(yv) + "</text>\n";
    }
    out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(chart.height - 10) +
           "\" text-anchor=\"middle\" font-size=\"13\">" + detail::escape(chart.x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
           num(top + ph / 2) + ")\">" + detail::escape(chart.y_label) + "</text>\n";

    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < s.error.size() && i < s.x.size(); ++i) {
            out += "<line x1=\"" + num(px(s.x[i])) + "\" y1=\"" + num(py(s.y[i] - s.error[i])) + "\" x2=\"" +
                   num(px(s.x[i])) + "\" y2=\"" + num(py(s.y[i] + s.error[i])) + "\" stroke=\"" + s.color +
                   "\" stroke-width=\"1\"/>\n";
        }
        if (s.style == Style::line) {
            out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                out += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
            }
            out += "\"/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                out += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"2\" fill=\"" +
                       s.color + "\"/>\n";
            }
        }
    }
    for (const auto& m : chart.markers) {
        out += "<line x1=\"" + num(px(m.x)) + "\" y1=\"" + num(top) + "\" x2=\"" + num(px(m.x)) + "\" y2=\"" +
               num(top + ph) + "\" stroke=\"" + m.color + "\" stroke-dasharray=\"4 3\"/>\n";
    }

    double ly = top + 10;
    for (const auto& s : chart.series) {
        if (s.label.empty()) continue;
        out += "<rect x=\"" + num(left + pw + 12) + "\" y=\"" + num(ly - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
               s.color + "\"/>\n";
        out += "<text x=\"" + num(left + pw + 28) + "\" y=\"" + num(ly + 1) + "\" font-size=\"12\">" +
               detail::escape(s.label) + "</text>\n";
        ly += 18;
    }
    for (const auto& m : chart.markers) {
        out += "<line x1=\"" + num(left + pw + 12) + "\" y1=\"" + num(ly - 3) + "\" x2=\"" + num(left + pw + 22) +
               "\" y2=\"" + num(ly - 3) + "\" stroke=\"" + m.color + "\" stroke-dasharray=\"4 3\"/>\n";
        out += "<text x=\"" + num(left + pw + 28) + "\" y=\"" + num(ly + 1) + "\" font-size=\"12\">" +
               detail::escape(m.label) + "</text>\n";
        ly += 18;
    }
    out += "</g>\n";
    return out;
}

inline std::string document(double width, double height, const std::string& body) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           detail::num(width) + "\" height=\"" + detail::num(height) + "\" viewBox=\"0 0 " + detail::num(width) + " " +
           detail::num(height) + "\">\n" + body + "</svg>\n";
}

inline std::string render(const Chart& chart) { return document(chart.width, chart.height, render_group(chart, 0, 0)); }

/// Charts laid out row-major on a grid with `columns` panels per row.
inline std::string render_panels(const std::vector<Chart>& charts, std::size_t columns) {
    if (charts.empty()) return document(10, 10, "");
    columns = std::max<std::size_t>(1, std::min(columns, charts.size()));
    const double w = charts.front().width;
    const double h = charts.front().height;
    std::string body;
    for (std::size_t i = 0; i < charts.size(); ++i)
        body += render_group(charts[i], w * static_cast<double>(i % columns), h * static_cast<double>(i / columns));
    const std::size_t rows = (charts.size() + columns - 1) / columns;
    return document(w * static_cast<double>(columns), h * static_cast<double>(rows), body);
}

}  // namespace qsl::lab::svg
