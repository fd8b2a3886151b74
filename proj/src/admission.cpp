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

#include "sqlr/admission.hpp"

#include <algorithm>
#include <cmath>

#include "sqlr/cloudsim.hpp"

namespace sqlr {

void AcConfig::validate() const {
    exploration.validate();
    learning.validate();
    // GeometricLevels enforces 0 < target < boundary <= 100.
    (void)GeometricLevels(target, boundary);
}

AdmissionAgent::AdmissionAgent(AcConfig config)
    : config_(config), levels_(config.target, config.boundary) {
    config_.validate();
}

AcState AdmissionAgent::state(double utilization) const {
    const auto idx = levels_.index_of(utilization);
    return idx ? *idx : beyond_state();
}

double AdmissionAgent::reward(double resulting_utilization, AcAction action) const {
    const double bnd = levels_.boundary() / 100.0;
    if (action == AcAction::Drop) {
        return levels_.quantize_down(resulting_utilization) / 100.0;
    }
    const auto up = levels_.quantize_up(resulting_utilization);
    if (!up) {
        return 0.5 * (bnd - 1.0);
    }
    return *up / 100.0;
}

AcAction AdmissionAgent::decide(double utilization, RandomStream& rng) const {
    return static_cast<AcAction>(choose_action(table_, state(utilization), kAcActions, config_.exploration, rng));
}

double AdmissionAgent::learn(AcState prev, AcAction action, double resulting_utilization) {
    const double r = reward(resulting_utilization, action);
    const double next_max = table_.max_value(state(resulting_utilization), kAcActions);
    const double target = discounted_target(r, config_.learning.gamma, next_max);
    return table_.update(prev, static_cast<int>(action), target);
}

int AdmissionAgent::admission_limit() const {
    for (int level = levels_.top_index(); level >= 0; --level) {
        if (table_.value(level, static_cast<int>(AcAction::Admit)) >
            table_.value(level, static_cast<int>(AcAction::Drop))) {
            return levels_.upper_edge(level);
        }
    }
    throw DegeneratePolicyError("admission policy drops at every level");
}

AcPolicySummary AdmissionAgent::summary() const {
    AcPolicySummary out;
    try {
        out.admission_limit = admission_limit();
    } catch (const DegeneratePolicyError&) {
        out.admission_limit = 0;
    }
    for (AcState s = 0; s <= beyond_state(); ++s) {
        const auto probs = policy_probabilities(table_, s, kAcActions, config_.exploration);
        out.admit_probability.push_back(probs[0]);
        out.visits.push_back(table_.state_visits(s));
    }
    return out;
}

nlohmann::json AdmissionAgent::table_json() const {
    auto doc = qtable_to_json(table_, kAcStateEncoding);
    doc["levels"] = std::vector<int>(levels_.levels().begin(), levels_.levels().end());
    doc["boundary"] = levels_.boundary();
    return doc;
}

void AdmissionAgent::load_table(const nlohmann::json& doc) {
    if (doc.contains("levels") &&
        doc.at("levels").get<std::vector<int>>() != std::vector<int>(levels_.levels().begin(), levels_.levels().end())) {
        throw QTableFormatError("admission table was trained with different levels");
    }
    table_ = qtable_from_json<AcState>(doc, kAcStateEncoding);
}

nlohmann::json to_json(const AcPolicySummary& summary, const GeometricLevels& levels) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t s = 0; s < summary.admit_probability.size(); ++s) {
        nlohmann::json row{{"admit_probability", summary.admit_probability[s]}, {"visits", summary.visits[s]}};
        if (s < levels.levels().size()) {
            row["level"] = levels.levels()[s];
            row["upper"] = levels.upper_edge(static_cast<int>(s));
        } else {
            row["level"] = "beyond";
        }
        rows.push_back(std::move(row));
    }
    return {{"x_lim", summary.admission_limit}, {"levels", std::move(rows)}};
}

AcTrainingResult train_admission(AdmissionAgent& agent, const AcTrainingOptions& options, std::uint64_t seed) {
    ClusterConfig vm_config;
    vm_config.cores = options.cores;
    vm_config.core_capacity = options.core_capacity;
    vm_config.max_vms = 1;
    vm_config.boot_s = 0;
    vm_config.keep_ledger = false;
    vm_config.validate();

    auto scenario_rng = RandomStream::derive(seed, "ac-training-scenarios");
    auto decision_rng = RandomStream::derive(seed, "ac-exploration");
    const double job_share = 100.0 / options.cores;
    const auto edges = agent.levels().levels();
    const AcState beyond = agent.beyond_state();

    AcTrainingResult result;
    for (std::uint64_t episode = 0; episode < options.episodes; ++episode) {
        const auto target = static_cast<AcState>(scenario_rng.uniform_int(0, beyond));
        double lo = 0.0;
        double hi = 0.0;
        if (target == beyond) {
            lo = agent.levels().boundary();
            hi = 100.0;
        } else {
            lo = edges[static_cast<std::size_t>(target)];
            hi = agent.levels().upper_edge(target);
        }
        double observed = lo + (hi - lo) * scenario_rng.uniform01();
        if (target != beyond && observed >= hi) {
            observed = lo;
        }

        Cluster vm(vm_config, 1);
        const auto running = std::min(options.cores, static_cast<int>(std::floor(observed / job_share)));
        std::uint64_t request_id = 0;
        for (int j = 0; j < running; ++j) {
            const auto pick = scenario_rng.uniform_int(0, static_cast<std::int64_t>(kIterationChoices.size()) - 1);
            const double left = static_cast<double>(kIterationChoices[static_cast<std::size_t>(pick)]) *
                                (1.0 - scenario_rng.uniform01());
            vm.place(Request{request_id++, 0, std::max<std::int64_t>(1, static_cast<std::int64_t>(left))}, 0);
        }

        const AcState state = agent.state(observed);
        const AcAction action = agent.decide(observed, decision_rng);
        if (action == AcAction::Admit) {
            const auto pick = scenario_rng.uniform_int(0, static_cast<std::int64_t>(kIterationChoices.size()) - 1);
            vm.place(Request{request_id++, 0, kIterationChoices[static_cast<std::size_t>(pick)]}, 0);
            ++result.admitted;
        }
        vm.step();
        vm.check_conservation();
        agent.learn(state, action, vm.vms().front().last_sample);
        ++result.episodes;
    }
    return result;
}

}  // namespace sqlr
