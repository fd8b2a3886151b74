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

/// \file qcurve.hpp
/// \brief Processor-sharing response-time curve, knee detection and the
///        utilization quantizers that define the agents' state spaces.
///
/// Utilization is handled in percent ([0, 100]) throughout this header.
/// Level boundaries are integer percents; intervals are lower-inclusive and
/// upper-exclusive, except the topmost level of each quantizer.

#ifndef SQLR_QCURVE_HPP
#define SQLR_QCURVE_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sqlr {

/// Raised when the tangent construction has no finite intersection.
class NoKneeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// T(rho) = ell / (capacity - rho) for a processor-sharing server.
struct PSCurve {
    double ops_per_request;  ///< ell, operations per request
    double capacity;         ///< C, operations per second

    PSCurve(double ell, double cap);
};

/// Response time for occupancy `rho`. Throws std::domain_error when the
/// queue is saturated (rho >= capacity) or rho is negative.
double response_time(const PSCurve& curve, double rho);

/// Slope dT/drho.
double response_gradient(const PSCurve& curve, double rho);

/// Occupancy at which the tangent taken where T'(rho) == target_gradient
/// meets the tangent at rho = 0.
///
/// Requires target_gradient > ell / capacity^2; throws NoKneeError otherwise.
double find_knee(const PSCurve& curve, double target_gradient = 0.5);

/// Occupancy where T'(rho) equals `target_gradient`.
double gradient_point(const PSCurve& curve, double target_gradient);

/// Geometric admission-control levels x_j = floor((1 - 2^-j) * x_tgt).
/// floor((1 - 2^-j) * target) for j = 0, 1, ... until a value repeats.
std::vector<int> geometric_level_values(int target);

class GeometricLevels {
public:
    /// Builds levels until the floored value repeats.
    /// Requires 0 < target < boundary <= 100.
    GeometricLevels(int target, int boundary);

    int target() const { return target_; }
    int boundary() const { return boundary_; }
    std::span<const int> levels() const { return levels_; }
    /// Index of the last level (n).
    int top_index() const { return static_cast<int>(levels_.size()) - 1; }

    /// Level index containing x, or std::nullopt when x > boundary.
    std::optional<int> index_of(double x) const;

    /// Largest level <= x; the boundary itself when x > boundary.
    int quantize_down(double x) const;

    /// Smallest level > x; the boundary for x in [x_n, boundary];
    /// std::nullopt when x lies beyond the boundary.
    std::optional<int> quantize_up(double x) const;

    /// Upper edge of level `index` (next level, or the boundary for x_n).
    int upper_edge(int index) const;

private:
    int target_;
    int boundary_;
    std::vector<int> levels_;
};

/// Uniform-ish quantizer used by the scaling agent: 2-point steps on [0,20),
/// 5-point steps on [20, limit) and one coarse level [limit, 100].
class ScalerLevels {
public:
    /// Requires 20 < limit < 100.
    explicit ScalerLevels(int limit);

    int limit() const { return limit_; }
    int size() const { return static_cast<int>(lower_.size()); }
    /// Lower edges of every level, ascending, starting at 0.
    std::span<const int> lower_edges() const { return lower_; }

    double lower(int index) const;
    double upper(int index) const;
    double midpoint(int index) const;

    /// Index of the level containing x; x is clamped into [0, 100].
    int quantize(double x) const;

private:
    int limit_;
    std::vector<int> lower_;
};

}  // namespace sqlr

#endif  // SQLR_QCURVE_HPP
