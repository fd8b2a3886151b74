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


#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sqlr/qcurve.hpp"
#include "sqlr/random.hpp"

using namespace sqlr;

TEST_CASE("oracle: series erf agrees with std::erf") {
    for (double x = -3.0; x <= 3.0; x += 0.125) {
        CHECK(oracle::erf_series(x) == doctest::Approx(std::erf(x)).epsilon(1e-12));
    }
}

TEST_CASE("oracle: finite-difference knee on the reference curve") {
    CHECK(oracle::knee_fd(1.0, 100.0, 0.5) == doctest::Approx(find_knee(PSCurve(1.0, 100.0), 0.5)).epsilon(1e-4));
}

TEST_CASE("oracle: floating geometric levels") {
    CHECK(oracle::geometric_levels(60) == std::vector<int>{0, 30, 45, 52, 56, 58, 59});
}

TEST_CASE("response time") {
    const PSCurve c(1.0, 2.0);
    CHECK(response_time(c, 0.0) == 0.5);
    CHECK(response_time(c, 1.0) == 1.0);
    CHECK_THROWS_AS(response_time(c, 2.0), std::domain_error);
    CHECK_THROWS_AS(response_time(c, -1.0), std::domain_error);
    CHECK_THROWS(PSCurve(0.0, 1.0));
}

TEST_CASE("gradient point and knee") {
    const PSCurve c(1.0, 100.0);
    CHECK(gradient_point(c, 0.5) == doctest::Approx(100.0 - std::sqrt(2.0)));
    CHECK(response_gradient(c, gradient_point(c, 0.5)) == doctest::Approx(0.5));
    const double knee = find_knee(c, 0.5);
    CHECK(knee == doctest::Approx(97.21).epsilon(1e-4));
    CHECK(knee < gradient_point(c, 0.5));
}

TEST_CASE("knee needs a gradient above the initial slope") {
    const PSCurve c(1.0, 2.0);
    CHECK_THROWS_AS(find_knee(c, 0.25), NoKneeError);
    CHECK_THROWS_AS(find_knee(c, 0.1), NoKneeError);
}

TEST_CASE("knee lies below the gradient point for random curves") {
    RandomStream rng(17);
    for (int k = 0; k < 1000; ++k) {
        const double ell = 0.1 + 10.0 * rng.uniform01();
        const double cap = 1.0 + 1000.0 * rng.uniform01();
        const double g = ell / (cap * cap) * (1.5 + 1e4 * rng.uniform01());
        const PSCurve c(ell, cap);
        const double knee = find_knee(c, g);
        CHECK(knee < gradient_point(c, g));
        CHECK(knee > 0.0);
    }
}

TEST_CASE("geometric levels") {
    const GeometricLevels sixty(60, 62);
    CHECK(std::vector<int>(sixty.levels().begin(), sixty.levels().end()) ==
          std::vector<int>{0, 30, 45, 52, 56, 58, 59});
    CHECK(geometric_level_values(100) == std::vector<int>{0, 50, 75, 87, 93, 96, 98, 99});
    CHECK_THROWS(geometric_level_values(0));
    for (int t = 1; t <= 100; ++t) {
        CHECK(geometric_level_values(t) == oracle::geometric_levels(t));
    }
    for (int t = 1; t < 100; ++t) {
        const GeometricLevels g(t, 100);
        const auto o = oracle::geometric_levels(t);
        CHECK(std::vector<int>(g.levels().begin(), g.levels().end()) == o);
        CHECK(g.levels().front() == 0);
    }
    CHECK_THROWS(GeometricLevels(0, 62));
    CHECK_THROWS(GeometricLevels(62, 62));
    CHECK_THROWS(GeometricLevels(60, 101));
}

TEST_CASE("geometric quantizer") {
    const GeometricLevels g(60, 62);
    CHECK(g.quantize_down(33) == 30);
    CHECK(g.quantize_up(33) == 45);
    CHECK(g.quantize_down(0) == 0);
    CHECK(g.quantize_up(59.5) == 62);
    CHECK(g.quantize_down(62) == 59);
    CHECK_FALSE(g.index_of(70).has_value());
    CHECK_FALSE(g.quantize_up(70).has_value());
    CHECK(g.quantize_down(70) == 62);
    const std::vector<int> edges(g.levels().begin(), g.levels().end());
    for (double x = 0.0; x <= 62.0; x += 0.25) {
        CHECK(*g.index_of(x) == oracle::scan_index(edges, x));
    }
}

TEST_CASE("scaler levels") {
    const ScalerLevels s(45);
    CHECK(s.size() == 16);
    CHECK(s.quantize(0) == 0);
    CHECK(s.quantize(44.9) == 14);
    CHECK(s.quantize(45) == 15);
    CHECK(s.quantize(100) == 15);
    CHECK(s.quantize(-5) == 0);
    CHECK(s.upper(15) == 100.0);
    CHECK(s.midpoint(15) == 72.5);
    CHECK_THROWS(ScalerLevels(20));
    CHECK_THROWS(ScalerLevels(100));
    for (int limit = 21; limit < 100; ++limit) {
        const ScalerLevels q(limit);
        const auto edges = oracle::scaler_edges(limit);
        REQUIRE(std::vector<int>(q.lower_edges().begin(), q.lower_edges().end()) == edges);
        for (double x = 0.0; x <= 100.0; x += 0.5) {
            CHECK(q.quantize(x) == oracle::scan_index(edges, x));
        }
    }
}
