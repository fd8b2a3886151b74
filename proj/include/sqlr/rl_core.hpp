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

/// \file rl_core.hpp
/// \brief Tabular short-term-memory Q-learning shared by the admission and
///        scaling agents.
///
/// The value update is the running-mean form
///
///     Q <- (1/n) [ (R' - Q) + (n - 1) Q ]
///
/// with n counting the current visit, so its stationary point under a fixed
/// target R' is R'/2. Exploration is per state: epsilon decays linearly with
/// the state's visit count and floors at eps_min; exploratory draws follow the
/// weighted-fair distribution instead of a uniform one.

#ifndef SQLR_RL_CORE_HPP
#define SQLR_RL_CORE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqlr/random.hpp"

namespace sqlr {

struct ExplorationParams {
    std::uint64_t convergence_visits = 100;  ///< M
    double eps_min = 0.01;

    void validate() const;
};

struct LearningParams {
    double gamma = 0.9;

    void validate() const;
};

/// Per-state exploration probability, max(1 - i/M, eps_min) below M and
/// eps_min from M on.
double epsilon(std::uint64_t state_visits, const ExplorationParams& params);

/// R' = r + gamma * max_a Q(s', a).
double discounted_target(double reward, double gamma, double max_next_q);

/// One running-mean update; `visits` counts the current episode (>= 1).
double mean_update(double q_old, std::uint64_t visits, double target);

/// Weighted-fair guided exploration distribution over L actions.
///
/// Psi_a = Q_a + sum_j |Q_j| and P_a is proportional to
/// Psi_a * (1 - tanh(n_a / i)). Uniform when every Psi_a is zero or i == 0.
std::vector<double> selection_distribution(std::span<const double> q_values,
                                           std::span<const std::uint64_t> pair_visits,
                                           std::uint64_t state_visits);

struct QCell {
    double q = 0.0;
    std::uint64_t visits = 0;
};

/// Value store keyed by (State, action). Single writer.
template <typename State>
class QTable {
public:
    struct StateEntry {
        std::map<int, QCell> cells;
        std::uint64_t visits = 0;
    };

    double value(const State& s, int action) const {
        const auto* cell = find(s, action);
        return cell ? cell->q : 0.0;
    }

    std::uint64_t pair_visits(const State& s, int action) const {
        const auto* cell = find(s, action);
        return cell ? cell->visits : 0;
    }

    std::uint64_t state_visits(const State& s) const {
        const auto it = states_.find(s);
        return it == states_.end() ? 0 : it->second.visits;
    }

    /// Overwrites a value without touching visit counts (initialization).
    void set_value(const State& s, int action, double q) { states_[s].cells[action].q = q; }

    /// Applies the running-mean update toward `target`; returns the new value.
    double update(const State& s, int action, double target) {
        auto& entry = states_[s];
        auto& cell = entry.cells[action];
        ++cell.visits;
        ++entry.visits;
        cell.q = mean_update(cell.q, cell.visits, target);
        return cell.q;
    }

    /// max_a Q(s, a) over `actions`; 0 for an empty set.
    double max_value(const State& s, std::span<const int> actions) const {
        if (actions.empty()) {
            return 0.0;
        }
        double best = value(s, actions.front());
        for (const int a : actions.subspan(1)) {
            best = std::max(best, value(s, a));
        }
        return best;
    }

    const std::map<State, StateEntry>& states() const { return states_; }

    /// Visited states, i.e. with at least one update.
    std::size_t visited_states() const {
        std::size_t count = 0;
        for (const auto& [key, entry] : states_) {
            count += entry.visits > 0 ? 1 : 0;
        }
        return count;
    }

    /// Fraction of visited states whose epsilon has reached eps_min.
    double convergence_fraction(const ExplorationParams& params) const {
        std::size_t visited = 0;
        std::size_t converged = 0;
        for (const auto& [key, entry] : states_) {
            if (entry.visits == 0) {
                continue;
            }
            ++visited;
            converged += entry.visits >= params.convergence_visits ? 1 : 0;
        }
        return visited == 0 ? 0.0 : static_cast<double>(converged) / static_cast<double>(visited);
    }

    /// Restores raw contents; used by persistence.
    void restore(const State& s, int action, QCell cell) { states_[s].cells[action] = cell; }
    void restore_visits(const State& s, std::uint64_t visits) { states_[s].visits = visits; }

private:
    const QCell* find(const State& s, int action) const {
        const auto it = states_.find(s);
        if (it == states_.end()) {
            return nullptr;
        }
        const auto cit = it->second.cells.find(action);
        return cit == it->second.cells.end() ? nullptr : &cit->second;
    }

    std::map<State, StateEntry> states_;
};

/// Lowest-keyed action with the largest value.
template <typename State>
int greedy_action(const QTable<State>& table, const State& s, std::span<const int> actions) {
    if (actions.empty()) {
        throw std::invalid_argument("greedy_action: empty action set");
    }
    int best = actions.front();
    double best_q = table.value(s, best);
    for (const int a : actions.subspan(1)) {
        const double q = table.value(s, a);
        if (q > best_q || (q == best_q && a < best)) {
            best = a;
            best_q = q;
        }
    }
    return best;
}

template <typename State>
std::vector<double> exploration_distribution(const QTable<State>& table, const State& s,
                                             std::span<const int> actions) {
    std::vector<double> q;
    std::vector<std::uint64_t> n;
    q.reserve(actions.size());
    n.reserve(actions.size());
    for (const int a : actions) {
        q.push_back(table.value(s, a));
        n.push_back(table.pair_visits(s, a));
    }
    return selection_distribution(q, n, table.state_visits(s));
}

/// Exact probability of each action under choose_action.
template <typename State>
std::vector<double> policy_probabilities(const QTable<State>& table, const State& s,
                                         std::span<const int> actions, const ExplorationParams& params) {
    const double eps = epsilon(table.state_visits(s), params);
    auto probs = exploration_distribution(table, s, actions);
    const int greedy = greedy_action(table, s, actions);
    for (std::size_t k = 0; k < actions.size(); ++k) {
        probs[k] *= eps;
        if (actions[k] == greedy) {
            probs[k] += 1.0 - eps;
        }
    }
    return probs;
}

/// epsilon-greedy selection whose exploratory branch samples the
/// weighted-fair distribution over the permissible actions.
template <typename State>
int choose_action(const QTable<State>& table, const State& s, std::span<const int> actions,
                  const ExplorationParams& params, RandomStream& rng) {
    if (actions.empty()) {
        throw std::invalid_argument("choose_action: no permissible action");
    }
    if (actions.size() == 1) {
        return actions.front();
    }
    const double eps = epsilon(table.state_visits(s), params);
    if (rng.uniform01() >= eps) {
        return greedy_action(table, s, actions);
    }
    const auto probs = exploration_distribution(table, s, actions);
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t k = 0; k < actions.size(); ++k) {
        acc += probs[k];
        if (u < acc) {
            return actions[k];
        }
    }
    return actions.back();
}

// ---------------------------------------------------------------- persistence

inline constexpr int kQTableFormatVersion = 1;

class QTableFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// `encoding` names the state-key layout so tables of different agents
/// cannot be loaded into each other.
template <typename State>
nlohmann::json qtable_to_json(const QTable<State>& table, const std::string& encoding) {
    nlohmann::json entries = nlohmann::json::array();
    nlohmann::json visits = nlohmann::json::array();
    for (const auto& [state, entry] : table.states()) {
        for (const auto& [action, cell] : entry.cells) {
            entries.push_back(nlohmann::json::array({state, action, cell.q, cell.visits}));
        }
        visits.push_back(nlohmann::json::array({state, entry.visits}));
    }
    return {{"version", kQTableFormatVersion},
            {"state_key", encoding},
            {"entries", std::move(entries)},
            {"state_visits", std::move(visits)}};
}

template <typename State>
QTable<State> qtable_from_json(const nlohmann::json& doc, const std::string& encoding) {
    if (!doc.contains("version") || doc.at("version").get<int>() != kQTableFormatVersion) {
        throw QTableFormatError("Q-table: unsupported format version");
    }
    if (doc.at("state_key").get<std::string>() != encoding) {
        throw QTableFormatError("Q-table: state key encoding '" + doc.at("state_key").get<std::string>() +
                                "' does not match '" + encoding + "'");
    }
    QTable<State> table;
    for (const auto& row : doc.at("entries")) {
        table.restore(row.at(0).get<State>(), row.at(1).get<int>(),
                      QCell{row.at(2).get<double>(), row.at(3).get<std::uint64_t>()});
    }
    for (const auto& row : doc.at("state_visits")) {
        table.restore_visits(row.at(0).get<State>(), row.at(1).get<std::uint64_t>());
    }
    return table;
}

}  // namespace sqlr

#endif  // SQLR_RL_CORE_HPP
