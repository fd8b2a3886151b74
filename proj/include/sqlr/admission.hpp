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

/// \file admission.hpp
/// \brief Admission-control agent: ADMIT/DROP per geometric utilization level.
///
/// States are the levels of a GeometricLevels quantizer plus one state for
/// utilization beyond the boundary. Rewards are the resulting utilization
/// rounded to a level edge (down for DROP, up for ADMIT) and expressed as a
/// fraction, so that admitting beyond the boundary earns (x_bnd - 1) / 2 < 0.

#ifndef SQLR_ADMISSION_HPP
#define SQLR_ADMISSION_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "sqlr/qcurve.hpp"
#include "sqlr/random.hpp"
#include "sqlr/rl_core.hpp"

namespace sqlr {

/// Action keys; ADMIT has the lower key and wins exact ties.
enum class AcAction : int { Admit = 0, Drop = 1 };

inline constexpr std::array<int, 2> kAcActions = {static_cast<int>(AcAction::Admit),
                                                  static_cast<int>(AcAction::Drop)};

/// Raised when a table admits at no level at all.
class DegeneratePolicyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AcConfig {
    int target = 60;    ///< x_tgt, percent
    int boundary = 62;  ///< x_bnd, percent
    ExplorationParams exploration{100, 0.01};
    LearningParams learning{0.9};

    void validate() const;
};

/// Level index, or levels().size() for the beyond-boundary state.
using AcState = int;

inline constexpr const char* kAcStateEncoding = "ac_level";

struct AcPolicySummary {
    int admission_limit = 0;
    std::vector<double> admit_probability;  ///< per level, beyond-boundary last
    std::vector<std::uint64_t> visits;
};

class AdmissionAgent {
public:
    explicit AdmissionAgent(AcConfig config);

    const AcConfig& config() const { return config_; }
    const GeometricLevels& levels() const { return levels_; }
    const QTable<AcState>& table() const { return table_; }
    QTable<AcState>& table() { return table_; }

    AcState beyond_state() const { return static_cast<AcState>(levels_.levels().size()); }
    AcState state(double utilization) const;

    /// Reward in fractional-utilization units for the utilization observed
    /// after the decision.
    double reward(double resulting_utilization, AcAction action) const;

    AcAction decide(double utilization, RandomStream& rng) const;

    /// One learning episode; returns the new Q value of (prev, action).
    double learn(AcState prev, AcAction action, double resulting_utilization);

    /// Upper edge of the highest level where Q(ADMIT) > Q(DROP).
    /// Throws DegeneratePolicyError when there is none.
    int admission_limit() const;

    /// Exact admit probability of decide() in every state.
    AcPolicySummary summary() const;

    nlohmann::json table_json() const;
    void load_table(const nlohmann::json& doc);

private:
    AcConfig config_;
    GeometricLevels levels_;
    QTable<AcState> table_;
};

nlohmann::json to_json(const AcPolicySummary& summary, const GeometricLevels& levels);

/// Deployed admission rule: admit iff the selected VM's latest utilization
/// does not exceed the learned limit.
inline bool admit_below_limit(double utilization, int limit) {
    return utilization <= static_cast<double>(limit);
}

/// Synthetic single-VM training stream.
///
/// Every episode picks one of the agent's states uniformly and draws a logged
/// utilization x uniformly inside it. The VM behind that log entry holds
/// floor(x / per-job share) running jobs (the fractional part is a job that
/// finished during the logged second), each with a random share of its work
/// left. The agent decides, the VM runs one tick, and the new log entry is
/// the resulting utilization.
struct AcTrainingOptions {
    std::uint64_t episodes = 5000;
    int cores = 4;
    double core_capacity = 200'000.0;
};

struct AcTrainingResult {
    std::uint64_t episodes = 0;
    std::uint64_t admitted = 0;
};

AcTrainingResult train_admission(AdmissionAgent& agent, const AcTrainingOptions& options, std::uint64_t seed);

}  // namespace sqlr

#endif  // SQLR_ADMISSION_HPP
