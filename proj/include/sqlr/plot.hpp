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

/// \file plot.hpp
/// \brief Minimal SVG charts for run reports.

#ifndef SQLR_PLOT_HPP
#define SQLR_PLOT_HPP

#include <string>
#include <vector>

#include "sqlr/report.hpp"

namespace sqlr {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool steps = false;  ///< draw as a staircase (CDFs, VM counts)
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    bool log_x = false;
};

std::string render_svg(const LinePlot& plot);

/// Frequency (colour) per (K, load bin); suppressed cells are hatched grey.
std::string render_heatmap_svg(const Heatmap& map, const std::string& title);

}  // namespace sqlr

#endif  // SQLR_PLOT_HPP
