// Copyright 2026 The SQLR Simulator Authors
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

#include "sqlr/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace sqlr {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 160;
constexpr double kTop = 40;
constexpr double kBottom = 55;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
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

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void settle() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi <= lo) {
            hi = lo + (lo == 0.0 ? 1.0 : std::abs(lo) * 0.1);
        }
    }
};

std::string header(const std::string& title) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
        kWidth, kHeight, kWidth / 2, escape(title));
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
    Range xr;
    Range yr;
    const auto tx = [&](double v) { return plot.log_x ? std::log10(std::max(v, 1e-300)) : v; };
    for (const auto& s : plot.series) {
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            xr.add(tx(s.x[k]));
            yr.add(s.y[k]);
        }
    }
    xr.settle();
    yr.settle();
    yr.lo = std::min(yr.lo, 0.0);

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const auto px = [&](double v) { return kLeft + (tx(v) - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto py = [&](double v) { return kTop + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::string out = header(plot.title);
    fmt::format_to(std::back_inserter(out),
                   "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                   kTop, pw, ph);
    for (int t = 0; t <= 5; ++t) {
        const double fx = xr.lo + (xr.hi - xr.lo) * t / 5.0;
        const double fy = yr.lo + (yr.hi - yr.lo) * t / 5.0;
        const double gx = kLeft + pw * t / 5.0;
        const double gy = kTop + ph - ph * t / 5.0;
        const double label_x = plot.log_x ? std::pow(10.0, fx) : fx;
        fmt::format_to(std::back_inserter(out),
                       "<line x1=\"{0:.1f}\" y1=\"{1}\" x2=\"{0:.1f}\" y2=\"{2}\" stroke=\"#ddd\"/>\n"
                       "<text x=\"{0:.1f}\" y=\"{3}\" text-anchor=\"middle\">{4:.3g}</text>\n"
                       "<line x1=\"{5}\" y1=\"{6:.1f}\" x2=\"{7}\" y2=\"{6:.1f}\" stroke=\"#ddd\"/>\n"
                       "<text x=\"{8}\" y=\"{9:.1f}\" text-anchor=\"end\">{10:.3g}</text>\n",
                       gx, kTop, kTop + ph, kTop + ph + 16, label_x, kLeft, gy, kLeft + pw, kLeft - 6, gy + 4, fy);
    }
    fmt::format_to(std::back_inserter(out),
                   "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n"
                   "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
                   kLeft + pw / 2, kHeight - 14, escape(plot.x_label), kTop + ph / 2, kTop + ph / 2,
                   escape(plot.y_label));

    for (std::size_t s = 0; s < plot.series.size(); ++s) {
        const auto& series = plot.series[s];
        const char* colour = kPalette[s % kPalette.size()];
        std::string points;
        const auto n = std::min(series.x.size(), series.y.size());
        for (std::size_t k = 0; k < n; ++k) {
            if (series.steps && k > 0) {
                fmt::format_to(std::back_inserter(points), "{:.2f},{:.2f} ", px(series.x[k]), py(series.y[k - 1]));
            }
            fmt::format_to(std::back_inserter(points), "{:.2f},{:.2f} ", px(series.x[k]), py(series.y[k]));
        }
        fmt::format_to(std::back_inserter(out),
                       "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n"
                       "<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"3\" fill=\"{}\"/>\n"
                       "<text x=\"{}\" y=\"{}\">{}</text>\n",
                       colour, points, kWidth - kRight + 12, kTop + 10 + 18 * s, colour, kWidth - kRight + 30,
                       kTop + 15 + 18 * s, escape(series.label));
    }
    out += "</svg>\n";
    return out;
}

std::string render_heatmap_svg(const Heatmap& map, const std::string& title) {
    int k_lo = std::numeric_limits<int>::max();
    int k_hi = std::numeric_limits<int>::min();
    int b_hi = 0;
    for (const auto& c : map.cells) {
        k_lo = std::min(k_lo, c.vms);
        k_hi = std::max(k_hi, c.vms);
        b_hi = std::max(b_hi, c.load_bin);
    }
    if (map.cells.empty()) {
        k_lo = k_hi = 1;
    }
    const int cols = k_hi - k_lo + 1;
    const int rows = b_hi + 1;
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const double cw = pw / cols;
    const double ch = ph / rows;

    std::string out = header(title);
    out += "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">"
           "<path d=\"M0,6 L6,0\" stroke=\"#999\"/></pattern></defs>\n";
    for (const auto& c : map.cells) {
        const double x = kLeft + (c.vms - k_lo) * cw;
        const double y = kTop + ph - (c.load_bin + 1) * ch;
        if (c.suppressed) {
            fmt::format_to(std::back_inserter(out),
                           "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"url(#hatch)\" "
                           "stroke=\"#ccc\"/>\n",
                           x, y, cw, ch);
            continue;
        }
        const int shade = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(c.frequency, 0.0, 1.0))));
        fmt::format_to(std::back_inserter(out),
                       "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"rgb(255,{},{})\" "
                       "stroke=\"#ccc\"><title>K={} load&lt;{} n={} freq={:.3f}</title></rect>\n"
                       "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"10\">{:.2f}</text>\n",
                       x, y, cw, ch, shade, shade, c.vms, (c.load_bin + 1) * map.load_bin_width, c.responses,
                       c.frequency, x + cw / 2, y + ch / 2 + 4, c.frequency);
    }
    for (int k = k_lo; k <= k_hi; ++k) {
        fmt::format_to(std::back_inserter(out), "<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       kLeft + (k - k_lo + 0.5) * cw, kTop + ph + 16, k);
    }
    for (int b = 0; b < rows; ++b) {
        fmt::format_to(std::back_inserter(out), "<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">&lt;{}</text>\n",
                       kLeft - 6, kTop + ph - (b + 0.5) * ch + 4, (b + 1) * map.load_bin_width);
    }
    fmt::format_to(std::back_inserter(out),
                   "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">VMs (K)</text>\n"
                   "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">"
                   "offered load (req/min)</text>\n",
                   kLeft + pw / 2, kHeight - 14, kTop + ph / 2, kTop + ph / 2);
    out += "</svg>\n";
    return out;
}

}  // namespace sqlr
