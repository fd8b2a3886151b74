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

#include "sqlr/scaler.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sqlr {

void to_json(nlohmann::json& j, const ScalerState& s) {
    j = nlohmann::json::array({s.vms, s.prev_level, s.cur_level});
}

void from_json(const nlohmann::json& j, ScalerState& s) {
    s.vms = j.at(0).get<int>();
    s.prev_level = j.at(1).get<int>();
    s.cur_level = j.at(2).get<int>();
}

void ScalerRewardParams::validate() const {
    if (!(theta >= 0.0) || !(beta >= 0.0)) {
        throw std::invalid_argument("scaler reward: theta and beta must be >= 0");
    }
    if (!(r_min > 0.0)) {
        throw std::invalid_argument("scaler reward: r_min must be > 0");
    }
    if (!(p_blk >= 0.0 && p_blk <= 1.0)) {
        throw std::invalid_argument("scaler reward: p_blk must lie in [0, 1]");
    }
}

double sqlr_reward(double blocking, int vms, const ScalerRewardParams& params) {
    const double r_blk = blocking <= params.p_blk ? params.r_min : params.theta * (params.p_blk - blocking);
    return r_blk + params.beta * (1.0 - vms);
}

double p0_estimate(double x, double x_lim, double x_bnd) {
    if (!(x_lim < x_bnd)) {
        throw std::invalid_argument("p0_estimate: require x_lim < x_bnd");
    }
    if (x < x_lim) {
        return 0.0;
    }
    if (x > x_bnd) {
        return 1.0;
    }
    const double eta = (x - x_lim) / (x_bnd - x_lim);
    return 0.5 * (1.0 + std::erf(eta * std::numbers::e / std::numbers::sqrt2));
}

void ScalerConfig::validate() const {
    reward.validate();
    exploration.validate();
    learning.validate();
    if (max_step < 1) {
        throw std::invalid_argument("scaler: max_step must be >= 1");
    }
    if (max_vms < 1) {
        throw std::invalid_argument("scaler: max_vms must be >= 1");
    }
    if (!(admission_limit < boundary)) {
        throw std::invalid_argument("scaler: admission limit must be below the boundary");
    }
    (void)ScalerLevels(admission_limit);
}

std::vector<int> permissible_deltas(int vms, int max_step, int max_vms) {
    std::vector<int> out;
    for (int d = -max_step; d <= max_step; ++d) {
        const int k = vms + d;
        if (k >= 1 && k <= max_vms) {
            out.push_back(d);
        }
    }
    return out;
}

int apply_damping(int delta, bool converged, DampingState& damping) {
    if (delta >= 0) {
        damping.pending_scale_in = false;
        return delta;
    }
    if (!converged) {
        return delta;
    }
    if (!damping.pending_scale_in) {
        damping.pending_scale_in = true;
        return 0;
    }
    damping.pending_scale_in = false;
    return delta;
}

ScalingAgent::ScalingAgent(ScalerConfig config) : config_(config), levels_(config.admission_limit) {
    config_.validate();
}

void ScalingAgent::init_diagonals() {
    for (int k = 1; k <= config_.max_vms; ++k) {
        for (int level = 0; level < levels_.size(); ++level) {
            const double p0 = p0_estimate(levels_.midpoint(level), config_.admission_limit, config_.boundary);
            table_.set_value(ScalerState{k, level, level}, 0, sqlr_reward(p0, k, config_.reward));
        }
    }
}

ScalerState ScalingAgent::state(int vms, double prev_utilization, double cur_utilization) const {
    return ScalerState{vms, levels_.quantize(prev_utilization), levels_.quantize(cur_utilization)};
}

bool ScalingAgent::converged(const ScalerState& s) const {
    return table_.state_visits(s) >= config_.exploration.convergence_visits;
}

int ScalingAgent::select(const ScalerState& s, RandomStream& rng) const {
    const auto deltas = permissible_deltas(s.vms, config_.max_step, config_.max_vms);
    return choose_action(table_, s, deltas, config_.exploration, rng);
}

ScaleDecision ScalingAgent::decide(const ScalerState& s, RandomStream& rng) {
    ScaleDecision d;
    d.selected = select(s, rng);
    d.applied = config_.damping ? apply_damping(d.selected, converged(s), damping_) : d.selected;
    return d;
}

double ScalingAgent::observe(const ScalerState& prev, int chosen_delta, double blocking, int new_vms,
                             int new_cur_level) {
    const double r = sqlr_reward(blocking, new_vms, config_.reward);
    const double reference = table_.value(ScalerState{new_vms, new_cur_level, new_cur_level}, 0);
    return table_.update(prev, chosen_delta, discounted_target(r, config_.learning.gamma, reference));
}

nlohmann::json ScalingAgent::table_json() const {
    auto doc = qtable_to_json(table_, kScalerStateEncoding);
    doc["admission_limit"] = config_.admission_limit;
    doc["max_vms"] = config_.max_vms;
    return doc;
}

void ScalingAgent::load_table(const nlohmann::json& doc) {
    if (doc.contains("admission_limit") && doc.at("admission_limit").get<int>() != config_.admission_limit) {
        throw QTableFormatError("scaler table was trained with admission limit " +
                                std::to_string(doc.at("admission_limit").get<int>()));
    }
    table_ = qtable_from_json<ScalerState>(doc, kScalerStateEncoding);
}

}  // namespace sqlr
