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

#include "sqlr/rl_core.hpp"

#include <cmath>

namespace sqlr {

void ExplorationParams::validate() const {
    if (convergence_visits < 1) {
        throw std::invalid_argument("ExplorationParams: M must be >= 1");
    }
    if (!(eps_min >= 0.0 && eps_min < 1.0)) {
        throw std::invalid_argument("ExplorationParams: eps_min must lie in [0, 1)");
    }
}

void LearningParams::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("LearningParams: gamma must lie in [0, 1)");
    }
}

double epsilon(std::uint64_t state_visits, const ExplorationParams& params) {
    if (state_visits >= params.convergence_visits) {
        return params.eps_min;
    }
    const double linear =
        1.0 - static_cast<double>(state_visits) / static_cast<double>(params.convergence_visits);
    return std::max(linear, params.eps_min);
}

double discounted_target(double reward, double gamma, double max_next_q) {
    return reward + gamma * max_next_q;
}

double mean_update(double q_old, std::uint64_t visits, double target) {
    if (visits < 1) {
        throw std::invalid_argument("mean_update: visit count must include the current episode");
    }
    const double n = static_cast<double>(visits);
    const double delta = target - q_old;
    return (delta + (n - 1.0) * q_old) / n;
}

std::vector<double> selection_distribution(std::span<const double> q_values,
                                           std::span<const std::uint64_t> pair_visits,
                                           std::uint64_t state_visits) {
    const std::size_t count = q_values.size();
    if (count == 0 || pair_visits.size() != count) {
        throw std::invalid_argument("selection_distribution: mismatched or empty inputs");
    }
    std::vector<double> probs(count, 1.0 / static_cast<double>(count));
    if (state_visits == 0) {
        return probs;
    }

    double magnitude = 0.0;
    for (const double q : q_values) {
        magnitude += std::abs(q);
    }
    double total = 0.0;
    for (std::size_t a = 0; a < count; ++a) {
        // Psi >= 0 by construction; clamp the rounding residue of q + |q|.
        const double psi = std::max(0.0, q_values[a] + magnitude);
        const double phi = static_cast<double>(pair_visits[a]) / static_cast<double>(state_visits);
        probs[a] = psi * (1.0 - std::tanh(phi));
        total += probs[a];
    }
    if (!(total > 0.0)) {
        std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(count));
        return probs;
    }
    for (double& p : probs) {
        p /= total;
    }
    return probs;
}

}  // namespace sqlr
