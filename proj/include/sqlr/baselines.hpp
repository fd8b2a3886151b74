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

/// \file baselines.hpp
/// \brief Comparison provisioners: a queue-model EKF scaler and static K.
///
/// EKF state x = [x1, x2]: total demand (ops/s) and per-op service demand
/// (s/op). With c = K * C_vm the measurement model is
///
///     h(x) = [ x1 / c,  x2 / (1 - x1 / c) ]
///
/// i.e. mean utilization as a fraction and mean per-op response time.

#ifndef SQLR_BASELINES_HPP
#define SQLR_BASELINES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sqlr {

struct EkfConfig {
    double vm_capacity = 800'000.0;  ///< C_vm, ops/s
    double r_sla = 5e-6;             ///< target per-op response, s/op
    int max_vms = 10;
    std::int64_t interval_s = 90;
    double initial_service = 0.0;       ///< seed for x2, s/op; 0 means 1 / vm_capacity
    Eigen::Matrix2d process_noise;      ///< Q_n
    Eigen::Matrix2d measurement_noise;  ///< R_n
    Eigen::Matrix2d prior_covariance;

    /// Defaults derived from vm_capacity and r_sla.
    static EkfConfig defaults(double vm_capacity = 800'000.0, double r_sla = 5e-6, int max_vms = 10);
    void validate() const;
};

struct EkfTraceRow {
    std::int64_t cycle = 0;
    std::int64_t time_s = 0;
    int vms = 0;
    double z_util = 0.0;
    double z_response = 0.0;
    double x_demand = 0.0;
    double x_service = 0.0;
    double innovation_util = 0.0;
    double innovation_response = 0.0;
    int k_target = 0;
    std::string status;  ///< "seed", "update", "skip" or "reset"
};

Eigen::Vector2d ekf_measurement(const Eigen::Vector2d& x, int vms, double vm_capacity);
Eigen::Matrix2d ekf_jacobian(const Eigen::Vector2d& x, int vms, double vm_capacity);

/// Smallest K whose predicted per-op time stays within r_sla, clamped to
/// [1, max_vms]; max_vms when the service demand alone reaches r_sla.
int ekf_target_vms(const Eigen::Vector2d& x, double vm_capacity, double r_sla, int max_vms);

class EkfScaler {
public:
    explicit EkfScaler(EkfConfig config);

    const EkfConfig& config() const { return config_; }
    const Eigen::Vector2d& estimate() const { return x_; }
    const Eigen::Matrix2d& covariance() const { return p_; }
    bool initialized() const { return initialized_; }

    /// Seeds the estimate. Otherwise the first measured window seeds x1 from
    /// its utilization and x2 from initial_service.
    void set_estimate(const Eigen::Vector2d& x);

    /// One predict/update cycle on window averages. `mean_response` is empty
    /// when nothing completed in the window; the update is then skipped.
    /// Returns K_target.
    int cycle(double mean_utilization, std::optional<double> mean_response, int vms, std::int64_t time_s = 0);

    const std::vector<EkfTraceRow>& trace() const { return trace_; }

private:
    void seed_from(double util, int vms);

    EkfConfig config_;
    Eigen::Vector2d x_ = Eigen::Vector2d::Zero();
    Eigen::Matrix2d p_;
    bool initialized_ = false;
    int last_target_ = 1;
    std::int64_t cycles_ = 0;
    std::vector<EkfTraceRow> trace_;
};

/// Fixed allocation.
struct StaticConfig {
    int vms = 10;

    void validate(int max_vms) const;
};

inline int static_provision(const StaticConfig& config) { return config.vms; }

}  // namespace sqlr

#endif  // SQLR_BASELINES_HPP
