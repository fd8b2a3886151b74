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

/// \file harness.hpp
/// \brief Experiment configuration, the simulation loop and the run / train /
///        compare / report workflows behind the CLI.

#ifndef SQLR_HARNESS_HPP
#define SQLR_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqlr/admission.hpp"
#include "sqlr/baselines.hpp"
#include "sqlr/cloudsim.hpp"
#include "sqlr/report.hpp"
#include "sqlr/scaler.hpp"

namespace sqlr {

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Scheme { Sqlr, Ekf, Static };

const char* to_string(Scheme scheme);

struct AdmissionSettings {
    AcConfig agent;
    std::uint64_t episodes = 5000;
    std::optional<std::filesystem::path> table;  ///< pre-trained table to load
    std::optional<int> limit;                    ///< fixed x_lim, skips training
};

struct ScalerSettings {
    ScalerConfig agent;  ///< admission_limit and max_vms are filled in at run time
    std::optional<std::filesystem::path> table;
    std::optional<std::filesystem::path> training_profile;
    std::uint64_t training_episodes = 0;
    bool learn = true;  ///< keep learning during the measured run
};

struct ExperimentConfig {
    std::string name = "run";
    Scheme scheme = Scheme::Sqlr;
    std::uint64_t seed = 0;
    std::filesystem::path profile;
    std::int64_t epoch_s = 120;
    int initial_vms = 1;
    double r_sla = 5e-6;  ///< per-op response target, s/op
    ClusterConfig cluster;
    AdmissionSettings admission;
    ScalerSettings scaler;
    EkfConfig ekf = EkfConfig::defaults();
    int static_vms = 10;

    void validate() const;
};

/// Parses a config document; relative paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
/// Throws ConfigError (or DataFileError for unreadable files).
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Applies a scheme name: sqlr, ekf, static, or one of the comparison
/// variants sqlr-case1, sqlr-case2, static-<K>.
void apply_scheme(ExperimentConfig& config, const std::string& name);

/// The five comparison variants derived from one base config.
std::vector<ExperimentConfig> comparison_configs(const ExperimentConfig& base);

// ------------------------------------------------------------- simulation

class Controller {
public:
    virtual ~Controller() = default;
    virtual std::int64_t interval_s() const = 0;
    /// Called at the end of every interval with that window's metrics;
    /// returns the VM delta to apply.
    virtual int on_interval(const EpochRecord& window, const Cluster& cluster) = 0;
};

struct DecisionRow {
    std::int64_t index = 0;
    std::int64_t time_s = 0;
    ScalerState state;
    int selected = 0;
    int applied = 0;
    double avg_utilization = 0.0;
    double blocking = 0.0;  ///< of the window just ended
    double convergence = 0.0;
    std::size_t visited_states = 0;
};

class SqlrController : public Controller {
public:
    SqlrController(ScalingAgent& agent, RandomStream rng, std::int64_t epoch_s, bool learn);

    std::int64_t interval_s() const override { return epoch_s_; }
    int on_interval(const EpochRecord& window, const Cluster& cluster) override;
    const std::vector<DecisionRow>& decisions() const { return decisions_; }

private:
    ScalingAgent& agent_;
    RandomStream rng_;
    std::int64_t epoch_s_;
    bool learn_;
    std::optional<int> prev_level_;
    std::optional<std::pair<ScalerState, int>> pending_;
    std::vector<DecisionRow> decisions_;
};

class EkfController : public Controller {
public:
    EkfController(EkfConfig config, int max_step);

    std::int64_t interval_s() const override { return filter_.config().interval_s; }
    int on_interval(const EpochRecord& window, const Cluster& cluster) override;
    const EkfScaler& filter() const { return filter_; }

private:
    EkfScaler filter_;
    int max_step_;
};

struct SimulationOptions {
    ClusterConfig cluster;
    int initial_vms = 1;
    std::int64_t epoch_s = 120;
    int admission_limit = 45;
    std::int64_t duration_s = 0;
    bool drain = true;             ///< run on after duration_s until nothing is in flight
    std::uint64_t max_epochs = 0;  ///< stop early after this many epochs; 0 = none
    std::function<void(Cluster&)> after_step;  ///< runs before each conservation check
};

struct SimulationLog {
    std::vector<EpochRecord> epochs;
    std::vector<VmSample> vm_series;  ///< one sample per second of [0, duration_s)
    std::vector<LedgerEntry> ledger;
    ClusterTotals totals;
    double vm_hours_step = 0.0;  ///< at duration_s
    double vm_hours_lifetime = 0.0;
    std::int64_t ended_s = 0;
};

/// Runs the cluster over `arrivals` with the deployed admission rule.
/// Conservation is checked after every tick (InvariantViolation).
SimulationLog simulate(const SimulationOptions& options, std::span<const Request> arrivals, Controller* controller);

// ------------------------------------------------------------- workflows

struct AdmissionOutcome {
    AdmissionAgent agent;
    int limit = 0;
    bool trained = false;
};

/// Loads, fixes or trains the admission agent as configured.
AdmissionOutcome prepare_admission(const ExperimentConfig& config);

struct ConvergencePoint {
    std::uint64_t episode = 0;
    double fraction = 0.0;
    std::size_t visited_states = 0;
};

/// Fresh agent with initialized diagonals, or the configured table.
ScalingAgent make_scaler(const ExperimentConfig& config, int admission_limit);

/// Pre-trains on the training profile (repeated with fresh arrival seeds)
/// for `episodes` scaler epochs.
std::vector<ConvergencePoint> pretrain_scaler(ScalingAgent& agent, const ExperimentConfig& config,
                                              std::uint64_t episodes);

struct RunSummary {
    ReportBundle bundle;
    int admission_limit = 0;
    double vm_hours_lifetime = 0.0;
    std::optional<double> convergence;  ///< sqlr only
    std::filesystem::path out_dir;
};

nlohmann::json to_json(const RunSummary& summary);

/// Full run: prepare agents, simulate, and write every output under `out_dir`.
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Runs the comparison variants in parallel and writes a summary table.
std::vector<RunSummary> run_comparison(const ExperimentConfig& base, const std::filesystem::path& out_dir);

/// Rebuilds bundles and plots from the raw files of a run or comparison
/// directory. Returns true when every rebuilt bundle equals the stored one.
bool regenerate_report(const std::filesystem::path& dir);

/// Writes the SVG plots of one run into `plot_dir`.
void write_run_plots(const ReportBundle& bundle, std::span<const VmSample> vm_series,
                     const std::filesystem::path& plot_dir);

}  // namespace sqlr

#endif  // SQLR_HARNESS_HPP
