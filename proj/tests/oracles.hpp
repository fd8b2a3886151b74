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


// Independent reference implementations used by the unit and acceptance
// suites. None of them calls into the library.

#ifndef SQLR_TESTS_ORACLES_HPP
#define SQLR_TESTS_ORACLES_HPP

#include <cmath>
#include <vector>

namespace oracle {

/// Maclaurin series of erf, summed until the terms vanish.
inline double erf_series(double x) {
    long double sum = 0.0L;
    long double power = x;  // x^(2n+1)
    long double fact = 1.0L;
    for (int n = 0; n < 200; ++n) {
        if (n > 0) {
            power *= static_cast<long double>(x) * x;
            fact *= n;
        }
        const long double term = power / (fact * (2 * n + 1));
        sum += (n % 2 == 0) ? term : -term;
        if (std::fabs(static_cast<double>(term)) < 1e-20) {
            break;
        }
    }
    return static_cast<double>(2.0L * sum / std::sqrt(3.14159265358979323846264338327950288L));
}

inline double ps_time(double ell, double cap, double rho) { return ell / (cap - rho); }

/// Tangent-intersection knee from finite differences only: bisect for the
/// occupancy where the central-difference gradient reaches g, then intersect
/// that tangent with the forward-difference tangent at zero.
inline double knee_fd(double ell, double cap, double g) {
    const auto grad = [&](double rho) {
        const double h = std::max(1e-7 * cap, 1e-9);
        return (ps_time(ell, cap, rho + h) - ps_time(ell, cap, rho - h)) / (2 * h);
    };
    double lo = 0.0;
    double hi = cap * (1.0 - 1e-9);
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (grad(mid) < g ? lo : hi) = mid;
    }
    const double rho_star = 0.5 * (lo + hi);
    const double h0 = 1e-6 * cap;
    const double s0 = (ps_time(ell, cap, h0) - ps_time(ell, cap, 0.0)) / h0;
    const double t0 = ps_time(ell, cap, 0.0);
    const double ts = ps_time(ell, cap, rho_star);
    return (ts - g * rho_star - t0) / (s0 - g);
}

/// floor((1 - 2^-j) * t) in floating point until a value repeats.
inline std::vector<int> geometric_levels(int target) {
    std::vector<int> out;
    for (int j = 0; j < 64; ++j) {
        const int v = static_cast<int>(std::floor((1.0L - std::pow(2.0L, -j)) * target));
        if (!out.empty() && out.back() == v) {
            break;
        }
        out.push_back(v);
    }
    return out;
}

/// Index of the last edge <= x by linear scan.
inline int scan_index(const std::vector<int>& edges, double x) {
    int idx = 0;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        if (edges[k] <= x) {
            idx = static_cast<int>(k);
        }
    }
    return idx;
}

/// Scaler quantizer edges rebuilt from the step rule.
inline std::vector<int> scaler_edges(int limit) {
    std::vector<int> e;
    for (int x = 0; x < 20; x += 2) {
        e.push_back(x);
    }
    for (int x = 20; x < limit; x += 5) {
        e.push_back(x);
    }
    e.push_back(limit);
    return e;
}

}  // namespace oracle

#endif  // SQLR_TESTS_ORACLES_HPP
