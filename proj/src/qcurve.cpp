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

#include "sqlr/qcurve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sqlr {

PSCurve::PSCurve(double ell, double cap) : ops_per_request(ell), capacity(cap) {
    if (!(ell > 0.0) || !(cap > 0.0)) {
        throw std::invalid_argument("PSCurve: ell and capacity must be positive");
    }
}

double response_time(const PSCurve& curve, double rho) {
    if (rho < 0.0) {
        throw std::domain_error("response_time: negative occupancy");
    }
    if (rho >= curve.capacity) {
        throw std::domain_error("response_time: queue saturated (rho >= capacity)");
    }
    return curve.ops_per_request / (curve.capacity - rho);
}

double response_gradient(const PSCurve& curve, double rho) {
    const double gap = curve.capacity - rho;
    if (!(gap > 0.0)) {
        throw std::domain_error("response_gradient: queue saturated");
    }
    return curve.ops_per_request / (gap * gap);
}

double gradient_point(const PSCurve& curve, double target_gradient) {
    const double initial = response_gradient(curve, 0.0);
    if (!(target_gradient > initial)) {
        throw NoKneeError("find_knee: target gradient must exceed the gradient at zero occupancy");
    }
    // T'(rho) = ell / (C - rho)^2
    return curve.capacity - std::sqrt(curve.ops_per_request / target_gradient);
}

double find_knee(const PSCurve& curve, double target_gradient) {
    const double rho_star = gradient_point(curve, target_gradient);
    const double t0 = response_time(curve, 0.0);
    const double s0 = response_gradient(curve, 0.0);
    const double t_star = response_time(curve, rho_star);
    // t0 + s0 * rho == t_star + g * (rho - rho_star)
    const double knee = (t0 + target_gradient * rho_star - t_star) / (target_gradient - s0);
    if (!std::isfinite(knee)) {
        throw NoKneeError("find_knee: tangents do not intersect");
    }
    return knee;
}

std::vector<int> geometric_level_values(int target) {
    if (target < 1) {
        throw std::invalid_argument("geometric_level_values: target must be >= 1");
    }
    std::vector<int> levels{0};
    // floor((1 - 2^-j) * t) == t - ceil(t / 2^j), evaluated exactly in integers
    for (int j = 1; j < 31; ++j) {
        const long long denom = 1LL << j;
        const int next = target - static_cast<int>((target + denom - 1) / denom);
        if (next == levels.back()) {
            break;
        }
        levels.push_back(next);
    }
    return levels;
}

GeometricLevels::GeometricLevels(int target, int boundary) : target_(target), boundary_(boundary) {
    if (!(target > 0 && target < boundary && boundary <= 100)) {
        throw std::invalid_argument("GeometricLevels: require 0 < target < boundary <= 100, got target=" +
                                    std::to_string(target) + " boundary=" + std::to_string(boundary));
    }
    levels_ = geometric_level_values(target);
}

std::optional<int> GeometricLevels::index_of(double x) const {
    if (x > boundary_) {
        return std::nullopt;
    }
    const auto it = std::upper_bound(levels_.begin(), levels_.end(), x,
                                     [](double v, int level) { return v < level; });
    if (it == levels_.begin()) {
        return 0;
    }
    return static_cast<int>(std::distance(levels_.begin(), it)) - 1;
}

int GeometricLevels::quantize_down(double x) const {
    const auto idx = index_of(x);
    if (!idx) {
        return boundary_;
    }
    return levels_[static_cast<std::size_t>(*idx)];
}

std::optional<int> GeometricLevels::quantize_up(double x) const {
    const auto idx = index_of(x);
    if (!idx) {
        return std::nullopt;
    }
    return upper_edge(*idx);
}

int GeometricLevels::upper_edge(int index) const {
    if (index < 0 || index > top_index()) {
        throw std::out_of_range("GeometricLevels::upper_edge: bad level index");
    }
    if (index == top_index()) {
        return boundary_;
    }
    return levels_[static_cast<std::size_t>(index) + 1];
}

ScalerLevels::ScalerLevels(int limit) : limit_(limit) {
    if (!(limit > 20 && limit < 100)) {
        throw std::invalid_argument("ScalerLevels: require 20 < limit < 100, got " + std::to_string(limit));
    }
    for (int edge = 0; edge < 20; edge += 2) {
        lower_.push_back(edge);
    }
    for (int edge = 20; edge < limit; edge += 5) {
        lower_.push_back(edge);
    }
    lower_.push_back(limit);
}

double ScalerLevels::lower(int index) const {
    return lower_.at(static_cast<std::size_t>(index));
}

double ScalerLevels::upper(int index) const {
    if (index == size() - 1) {
        return 100.0;
    }
    return lower_.at(static_cast<std::size_t>(index) + 1);
}

double ScalerLevels::midpoint(int index) const {
    return 0.5 * (lower(index) + upper(index));
}

int ScalerLevels::quantize(double x) const {
    const double clamped = std::clamp(x, 0.0, 100.0);
    const auto it = std::upper_bound(lower_.begin(), lower_.end(), clamped,
                                     [](double v, int edge) { return v < edge; });
    return static_cast<int>(std::distance(lower_.begin(), it)) - 1;
}

}  // namespace sqlr
