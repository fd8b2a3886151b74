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

#include "sqlr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqlr {

namespace {

// Keeps the queue factor finite when the estimate overshoots capacity.
constexpr double kMinHeadroom = 1e-6;

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

EkfConfig EkfConfig::defaults(double vm_capacity, double r_sla, int max_vms) {
    EkfConfig c;
    c.vm_capacity = vm_capacity;
    c.r_sla = r_sla;
    c.max_vms = max_vms;
    c.process_noise = Eigen::Vector2d(1e4 * 1e4, 1e-8 * 1e-8).asDiagonal();
    c.measurement_noise = Eigen::Vector2d(0.02 * 0.02, (0.2 * r_sla) * (0.2 * r_sla)).asDiagonal();
    c.initial_service = 1.0 / vm_capacity;
    c.prior_covariance =
        Eigen::Vector2d((0.5 * vm_capacity) * (0.5 * vm_capacity), (0.1 / vm_capacity) * (0.1 / vm_capacity))
            .asDiagonal();
    return c;
}

void EkfConfig::validate() const {
    if (!(vm_capacity > 0.0) || !(r_sla > 0.0)) {
        throw std::invalid_argument("ekf: vm_capacity and r_sla must be > 0");
    }
    if (initial_service < 0.0) {
        throw std::invalid_argument("ekf: initial_service must be >= 0");
    }
    if (max_vms < 1 || interval_s < 1) {
        throw std::invalid_argument("ekf: max_vms and interval_s must be >= 1");
    }
    if (!finite(process_noise) || !finite(measurement_noise) || !finite(prior_covariance)) {
        throw std::invalid_argument("ekf: noise matrices must be finite");
    }
}

Eigen::Vector2d ekf_measurement(const Eigen::Vector2d& x, int vms, double vm_capacity) {
    const double c = vms * vm_capacity;
    const double u = x(0) / c;
    return {u, x(1) / (1.0 - u)};
}

Eigen::Matrix2d ekf_jacobian(const Eigen::Vector2d& x, int vms, double vm_capacity) {
    const double c = vms * vm_capacity;
    const double headroom = 1.0 - x(0) / c;
    Eigen::Matrix2d h;
    h << 1.0 / c, 0.0,
         x(1) / (c * headroom * headroom), 1.0 / headroom;
    return h;
}

int ekf_target_vms(const Eigen::Vector2d& x, double vm_capacity, double r_sla, int max_vms) {
    const double slack = 1.0 - x(1) / r_sla;
    if (!(slack > 0.0)) {
        return max_vms;
    }
    const double k = std::ceil(std::max(0.0, x(0)) / (vm_capacity * slack));
    if (!std::isfinite(k)) {
        return max_vms;
    }
    return static_cast<int>(std::clamp(k, 1.0, static_cast<double>(max_vms)));
}

EkfScaler::EkfScaler(EkfConfig config) : config_(std::move(config)), p_(config_.prior_covariance) {
    config_.validate();
}

void EkfScaler::set_estimate(const Eigen::Vector2d& x) {
    x_ = x;
    initialized_ = true;
}

void EkfScaler::seed_from(double util, int vms) {
    const double u = std::clamp(util, 0.0, 1.0 - kMinHeadroom);
    const double d = config_.initial_service > 0.0 ? config_.initial_service : 1.0 / config_.vm_capacity;
    x_ = Eigen::Vector2d(u * vms * config_.vm_capacity, d);
    p_ = config_.prior_covariance;
    initialized_ = true;
}

int EkfScaler::cycle(double mean_utilization, std::optional<double> mean_response, int vms, std::int64_t time_s) {
    EkfTraceRow row;
    row.cycle = cycles_++;
    row.time_s = time_s;
    row.vms = vms;
    row.z_util = mean_utilization;
    row.z_response = mean_response.value_or(0.0);
    if (!initialized_) {
        last_target_ = vms;
    }

    if (!mean_response) {
        row.status = "skip";
    } else if (!initialized_) {
        seed_from(mean_utilization, vms);
        row.status = "seed";
    } else {
        p_ += config_.process_noise;
        const Eigen::Vector2d z(mean_utilization, *mean_response);
        const Eigen::Vector2d y = z - ekf_measurement(x_, vms, config_.vm_capacity);
        const Eigen::Matrix2d h = ekf_jacobian(x_, vms, config_.vm_capacity);
        const Eigen::Matrix2d s = h * p_ * h.transpose() + config_.measurement_noise;
        const Eigen::Matrix2d gain = p_ * h.transpose() * s.inverse();
        const Eigen::Vector2d x_new = x_ + gain * y;
        Eigen::Matrix2d p_new = (Eigen::Matrix2d::Identity() - gain * h) * p_;
        p_new = (0.5 * (p_new + p_new.transpose())).eval();

        const double headroom = 1.0 - x_new(0) / (vms * config_.vm_capacity);
        row.innovation_util = y(0);
        row.innovation_response = y(1);
        if (!finite(x_new) || !finite(p_new) || !(headroom > kMinHeadroom)) {
            seed_from(mean_utilization, vms);
            row.status = "reset";
            row.x_demand = x_(0);
            row.x_service = x_(1);
            last_target_ = vms;
            row.k_target = vms;
            trace_.push_back(row);
            return vms;
        }
        x_ = x_new;
        p_ = p_new;
        row.status = "update";
    }

    if (initialized_) {
        last_target_ = ekf_target_vms(x_, config_.vm_capacity, config_.r_sla, config_.max_vms);
    }
    row.x_demand = x_(0);
    row.x_service = x_(1);
    row.k_target = last_target_;
    trace_.push_back(row);
    return last_target_;
}

void StaticConfig::validate(int max_vms) const {
    if (vms < 1 || vms > max_vms) {
        throw std::invalid_argument("static: vms must lie in [1, max_vms]");
    }
}

}  // namespace sqlr
