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


// Randomized property checks with seeded hand-rolled generators.

#include <doctest.h>

#include <algorithm>
#include <vector>

#include "oracles.hpp"
#include "sqlr/qcurve.hpp"
#include "sqlr/rl_core.hpp"
#include "sqlr/scaler.hpp"

using namespace sqlr;

namespace {

/// Removals expected from a run of consecutive converged scale-ins: every
/// second decision of the run applies, the others only arm the flag.
std::vector<int> damping_oracle(const std::vector<int>& decisions) {
    std::vector<int> out;
    int run = 0;
    for (const int d : decisions) {
        if (d < 0) {
            ++run;
            out.push_back(run % 2 == 0 ? d : 0);
        } else {
            run = 0;
            out.push_back(d);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("damping matches the pairing oracle") {
    RandomStream rng(2024);
    for (int seq = 0; seq < 20000; ++seq) {
        const auto len = static_cast<std::size_t>(rng.uniform_int(1, 12));
        std::vector<int> decisions(len);
        for (auto& d : decisions) {
            d = static_cast<int>(rng.uniform_int(-2, 2));
        }
        DampingState state;
        std::vector<int> applied;
        int removal_events = 0;
        int scale_ins = 0;
        int arms = 0;
        for (const int d : decisions) {
            const bool was_pending = state.pending_scale_in;
            applied.push_back(apply_damping(d, true, state));
            scale_ins += d < 0 ? 1 : 0;
            arms += (d < 0 && !was_pending) ? 1 : 0;
            removal_events += applied.back() < 0 ? 1 : 0;
        }
        REQUIRE(applied == damping_oracle(decisions));
        REQUIRE(removal_events <= scale_ins - arms);
    }
}

TEST_CASE("unconverged scale-ins pass through") {
    RandomStream rng(5);
    for (int k = 0; k < 10000; ++k) {
        DampingState state;
        state.pending_scale_in = rng.uniform01() < 0.5;
        const int d = static_cast<int>(rng.uniform_int(-2, -1));
        REQUIRE(apply_damping(d, false, state) == d);
    }
}

TEST_CASE("running mean stays between the old value and the target") {
    RandomStream rng(9);
    for (int k = 0; k < 100000; ++k) {
        const double q = rng.uniform01() * 20.0 - 10.0;
        const double target = rng.uniform01() * 20.0 - 10.0;
        const auto n = static_cast<std::uint64_t>(rng.uniform_int(1, 1000));
        const double next = mean_update(q, n, target);
        // (target - q)/n + (n-1)/n q is a convex mix of target - q and q
        const double lo = std::min(target - q, q);
        const double hi = std::max(target - q, q);
        REQUIRE(next >= lo - 1e-12);
        REQUIRE(next <= hi + 1e-12);
    }
}

TEST_CASE("quantizers are monotone") {
    RandomStream rng(77);
    for (int k = 0; k < 2000; ++k) {
        const int limit = static_cast<int>(rng.uniform_int(21, 99));
        const ScalerLevels s(limit);
        const int target = static_cast<int>(rng.uniform_int(1, 98));
        const GeometricLevels g(target, static_cast<int>(rng.uniform_int(target + 1, 100)));
        double prev_x = -1.0;
        int prev_s = 0;
        int prev_g = 0;
        for (int step = 0; step < 50; ++step) {
            const double x = prev_x + rng.uniform01() * 3.0;
            const int qs = s.quantize(x);
            REQUIRE(qs >= prev_s);
            REQUIRE(s.lower(qs) <= std::clamp(x, 0.0, 100.0));
            const auto qg = g.index_of(std::max(0.0, x));
            if (qg) {
                REQUIRE(*qg >= prev_g);
                prev_g = *qg;
            }
            prev_s = qs;
            prev_x = x;
        }
        const auto lv = g.levels();
        REQUIRE(std::adjacent_find(lv.begin(), lv.end(), std::greater_equal<>()) == lv.end());
    }
}

TEST_CASE("blocking estimate is monotone in utilization") {
    double prev = 0.0;
    for (double x = 0.0; x <= 100.0; x += 0.05) {
        const double p = p0_estimate(x, 45, 62);
        REQUIRE(p >= prev);
        REQUIRE(p <= 1.0);
        prev = p;
    }
}

TEST_CASE("knee agrees with the finite-difference oracle on random curves") {
    RandomStream rng(123);
    for (int k = 0; k < 500; ++k) {
        const double ell = 0.5 + 4.5 * rng.uniform01();
        const double cap = 10.0 + 990.0 * rng.uniform01();
        const double g = ell / (cap * cap) * (4.0 + 1e4 * rng.uniform01());
        const double knee = find_knee(PSCurve(ell, cap), g);
        REQUIRE(std::abs(knee - oracle::knee_fd(ell, cap, g)) / knee < 5e-3);
    }
}
