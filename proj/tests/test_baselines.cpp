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

#include <Eigen/Eigenvalues>

#include "sqlr/baselines.hpp"
#include "sqlr/random.hpp"

using namespace sqlr;

namespace {

constexpr double kCvm = 800'000.0;
constexpr double kR = 5e-6;

}  // namespace

TEST_CASE("measurement model and Jacobian") {
    const Eigen::Vector2d x(4e5, 2e-6);
    const auto z = ekf_measurement(x, 1, kCvm);
    CHECK(z(0) == doctest::Approx(0.5));
    CHECK(z(1) == doctest::Approx(4e-6));
    const auto j = ekf_jacobian(x, 1, kCvm);
    for (int col = 0; col < 2; ++col) {
        Eigen::Vector2d h = Eigen::Vector2d::Zero();
        h(col) = col == 0 ? 1.0 : 1e-12;
        const Eigen::Vector2d fd = (ekf_measurement(x + h, 1, kCvm) - ekf_measurement(x - h, 1, kCvm)) / (2 * h(col));
        CHECK(j(0, col) == doctest::Approx(fd(0)).epsilon(1e-6));
        CHECK(j(1, col) == doctest::Approx(fd(1)).epsilon(1e-6));
    }
}

TEST_CASE("target VM count") {
    CHECK(ekf_target_vms(Eigen::Vector2d(1.2e6, 0.25 * kR), kCvm, kR, 10) == 2);
    CHECK(ekf_target_vms(Eigen::Vector2d(1.0, 0.25 * kR), kCvm, kR, 10) == 1);
    CHECK(ekf_target_vms(Eigen::Vector2d(0.0, 0.25 * kR), kCvm, kR, 10) == 1);
    CHECK(ekf_target_vms(Eigen::Vector2d(-5.0, 0.25 * kR), kCvm, kR, 10) == 1);
    CHECK(ekf_target_vms(Eigen::Vector2d(1e9, 0.25 * kR), kCvm, kR, 10) == 10);
    CHECK(ekf_target_vms(Eigen::Vector2d(1e5, kR), kCvm, kR, 10) == 10);
}

TEST_CASE("default noise") {
    const auto c = EkfConfig::defaults();
    CHECK(c.process_noise(0, 0) == 1e8);
    CHECK(c.process_noise(1, 1) == doctest::Approx(1e-16));
    CHECK(c.measurement_noise(0, 0) == doctest::Approx(4e-4));
    CHECK(c.measurement_noise(1, 1) == doctest::Approx(1e-12));
    CHECK(c.initial_service == doctest::Approx(1.25e-6));
}

TEST_CASE("zero innovation leaves the estimate unchanged") {
    EkfScaler f(EkfConfig::defaults());
    const Eigen::Vector2d x(3e5, 1.5e-6);
    f.set_estimate(x);
    const auto z = ekf_measurement(x, 2, kCvm);
    f.cycle(z(0), z(1), 2);
    CHECK(f.estimate()(0) == doctest::Approx(x(0)).epsilon(1e-12));
    CHECK(f.estimate()(1) == doctest::Approx(x(1)).epsilon(1e-12));
}

TEST_CASE("first window seeds, empty windows skip") {
    EkfScaler f(EkfConfig::defaults());
    CHECK(f.cycle(0.3, std::nullopt, 3) == 3);
    CHECK_FALSE(f.initialized());
    CHECK(f.trace().back().status == "skip");
    f.cycle(0.25, 5e-6, 2);
    CHECK(f.initialized());
    CHECK(f.estimate()(0) == doctest::Approx(0.25 * 2 * kCvm));
    CHECK(f.estimate()(1) == doctest::Approx(1.0 / kCvm));
    CHECK(f.trace().back().status == "seed");
    const int held = f.trace().back().k_target;
    CHECK(f.cycle(0.9, std::nullopt, 2) == held);
}

TEST_CASE("converges on exact synthetic measurements") {
    const Eigen::Vector2d truth(3e5, 1.4e-6);
    EkfScaler f(EkfConfig::defaults());
    f.set_estimate(Eigen::Vector2d(2e5, 1.25e-6));
    for (int k = 0; k < 50; ++k) {
        const int vms = 1 + k % 2;
        const auto z = ekf_measurement(truth, vms, kCvm);
        f.cycle(z(0), z(1), vms);
    }
    CHECK(std::abs(f.estimate()(0) / truth(0) - 1.0) < 0.05);
    CHECK(std::abs(f.estimate()(1) / truth(1) - 1.0) < 0.05);
}

TEST_CASE("covariance stays symmetric PSD and K stays in range") {
    RandomStream rng(31);
    EkfScaler f(EkfConfig::defaults());
    int vms = 1;
    for (int k = 0; k < 5000; ++k) {
        const double u = rng.uniform01();
        const double r = kR * (0.5 + rng.uniform01());
        const bool empty = rng.uniform01() < 0.05;
        const int target = empty ? f.cycle(u, std::nullopt, vms) : f.cycle(u, r, vms);
        REQUIRE(target >= 1);
        REQUIRE(target <= 10);
        const Eigen::Matrix2d& p = f.covariance();
        REQUIRE((p - p.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(p);
        REQUIRE(eig.eigenvalues().minCoeff() >= -1e-9 * std::max(1.0, p.cwiseAbs().maxCoeff()));
        vms = std::clamp(target, 1, 10);
    }
}

TEST_CASE("overshooting update resets and holds K") {
    EkfScaler f(EkfConfig::defaults());
    f.set_estimate(Eigen::Vector2d(7.9e5, 1.25e-6));
    const int k = f.cycle(0.99999, 1.0, 1);
    CHECK(f.trace().back().status == "reset");
    CHECK(k == 1);
    CHECK(f.covariance() == EkfConfig::defaults().prior_covariance);
}

TEST_CASE("config validation") {
    auto c = EkfConfig::defaults();
    c.vm_capacity = 0.0;
    CHECK_THROWS(EkfScaler(c));
    c = EkfConfig::defaults();
    c.interval_s = 0;
    CHECK_THROWS(EkfScaler(c));
}

TEST_CASE("static provisioning") {
    CHECK(static_provision(StaticConfig{10}) == 10);
    CHECK(static_provision(StaticConfig{2}) == 2);
    CHECK_THROWS(StaticConfig{0}.validate(10));
    CHECK_THROWS(StaticConfig{11}.validate(10));
    CHECK_NOTHROW(StaticConfig{10}.validate(10));
}
