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

/// \file scaler.hpp
/// \brief Horizontal-scaling agent.
///
/// The table is organised as bubbles (one per VM count K) holding action
/// cards (one per scaling delta); each card is a grid over
/// (previous-epoch level, current-epoch level). In QTable terms the state key
/// is (K, prev, cur) and the action key is the delta.

#ifndef SQLR_SCALER_HPP
#define SQLR_SCALER_HPP

#include <compare>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "sqlr/qcurve.hpp"
#include "sqlr/random.hpp"
#include "sqlr/rl_core.hpp"

namespace sqlr {

struct ScalerState {
    int vms = 1;         ///< K, bubble
    int prev_level = 0;  ///< level over epoch [t-2, t-1)
    int cur_level = 0;   ///< level over epoch [t-1, t)

    auto operator<=>(const ScalerState&) const = default;
};

void to_json(nlohmann::json& j, const ScalerState& s);
void from_json(const nlohmann::json& j, ScalerState& s);

inline constexpr const char* kScalerStateEncoding = "scaler_k_prev_cur";

struct ScalerRewardParams {
    double theta = 1.0;   ///< blocking penalty weight
    double beta = 0.01;   ///< per-VM cost weight
    double r_min = 0.01;  ///< reward while blocking is on target
    double p_blk = 0.001; ///< target blocking probability

    void validate() const;
};

/// R_blk + R_res with R_blk = r_min if P <= p_blk else theta (p_blk - P),
/// and R_res = beta (1 - K).
double sqlr_reward(double blocking, int vms, const ScalerRewardParams& params);

/// Blocking estimate for a stable average utilization x (percent):
/// 0 below x_lim, 1 above x_bnd, 0.5 [1 + erf(eta e / sqrt 2)] between, with
/// eta = (x - x_lim) / (x_bnd - x_lim).
double p0_estimate(double x, double x_lim, double x_bnd);

struct ScalerConfig {
    int admission_limit = 45;  ///< x_lim, percent
    int boundary = 62;         ///< x_bnd, percent
    int max_step = 2;          ///< N
    int max_vms = 10;          ///< V_max
    bool damping = true;
    ScalerRewardParams reward;
    ExplorationParams exploration{100, 0.01};
    LearningParams learning{0.9};

    void validate() const;
};

/// Deltas d in [-N, N] with 1 <= K + d <= V_max, ascending.
std::vector<int> permissible_deltas(int vms, int max_step, int max_vms);

/// Two-consecutive scale-in rule for converged states.
struct DampingState {
    bool pending_scale_in = false;
};

int apply_damping(int delta, bool converged, DampingState& damping);

struct ScaleDecision {
    int selected = 0;  ///< card picked by the agent
    int applied = 0;   ///< delta after damping
};

class ScalingAgent {
public:
    explicit ScalingAgent(ScalerConfig config);

    const ScalerConfig& config() const { return config_; }
    const ScalerLevels& levels() const { return levels_; }
    const QTable<ScalerState>& table() const { return table_; }
    const DampingState& damping() const { return damping_; }

    /// Sets every card-0 diagonal cell to the reward expected at the level
    /// midpoint under the erf blocking estimate. All bubbles are covered.
    void init_diagonals();

    ScalerState state(int vms, double prev_utilization, double cur_utilization) const;

    /// True once epsilon has reached eps_min in `s`.
    bool converged(const ScalerState& s) const;

    /// Raw epsilon-greedy / weighted-fair choice among the permissible cards.
    int select(const ScalerState& s, RandomStream& rng) const;

    /// select() followed by damping (when enabled).
    ScaleDecision decide(const ScalerState& s, RandomStream& rng);

    /// Updates the R-Cell of `chosen_delta` in bubble `prev.vms` after the
    /// post-action epoch. Callers pass the applied delta. Returns the new
    /// cell value.
    double observe(const ScalerState& prev, int chosen_delta, double blocking, int new_vms, int new_cur_level);

    double convergence_fraction() const { return table_.convergence_fraction(config_.exploration); }

    nlohmann::json table_json() const;
    void load_table(const nlohmann::json& doc);

private:
    ScalerConfig config_;
    ScalerLevels levels_;
    QTable<ScalerState> table_;
    DampingState damping_;
};

}  // namespace sqlr

#endif  // SQLR_SCALER_HPP
