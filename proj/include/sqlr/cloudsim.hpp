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

/// \file cloudsim.hpp
/// \brief Time-stepped model of the serving cluster.
///
/// Time advances in 1 s ticks. Within a tick every job on a VM runs at
/// min(one core, fair share of all cores); a job that needs less than a full
/// tick finishes part-way through it and frees its core for the rest of the
/// tick. A VM's utilization sample is the fraction of its core-seconds used
/// during the tick, so it equals min(100, 100 * jobs / cores) whenever no job
/// finishes inside the tick.

#ifndef SQLR_CLOUDSIM_HPP
#define SQLR_CLOUDSIM_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace sqlr {

/// Raised when a simulation bookkeeping invariant breaks.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline constexpr std::array<std::int64_t, 10> kIterationChoices = {
    300'000, 400'000, 500'000, 600'000, 700'000, 800'000, 900'000, 1'000'000, 1'100'000, 1'200'000};

struct Request {
    std::uint64_t id = 0;
    std::int64_t arrival_s = 0;
    std::int64_t iterations = 0;
};

struct WorkloadSlot {
    std::int64_t duration_s = 3600;
    int omega_max_s = 9;  ///< inter-arrival gaps are uniform on {0..omega_max}
    int multiplier = 1;   ///< independent request streams in the slot
};

class WorkloadProfile {
public:
    WorkloadProfile() = default;
    explicit WorkloadProfile(std::vector<WorkloadSlot> slots);

    static WorkloadProfile from_json(const nlohmann::json& doc);
    static WorkloadProfile load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    const std::vector<WorkloadSlot>& slots() const { return slots_; }
    std::int64_t duration_s() const;
    /// Index of the slot containing time t.
    std::size_t slot_at(std::int64_t t) const;
    std::int64_t slot_start(std::size_t index) const;

private:
    std::vector<WorkloadSlot> slots_;
};

/// Time-ordered request stream; ids follow the ordering.
std::vector<Request> generate_arrivals(const WorkloadProfile& profile, std::uint64_t seed);

struct ClusterConfig {
    int cores = 4;
    double core_capacity = 200'000.0;  ///< ops/s per core
    int max_vms = 10;
    std::int64_t boot_s = 30;
    bool keep_ledger = true;

    void validate() const;
    double vm_capacity() const { return cores * core_capacity; }
};

enum class VmPhase { Booting, Active, Draining };

struct Job {
    std::uint64_t request_id = 0;
    std::int64_t arrival_s = 0;
    std::int64_t iterations = 0;
    double remaining = 0.0;
};

struct VirtualMachine {
    std::uint64_t id = 0;
    VmPhase phase = VmPhase::Booting;
    std::int64_t boot_remaining = 0;
    std::int64_t created_s = 0;
    std::vector<Job> jobs;
    double last_sample = 0.0;  ///< most recent 1 s utilization log entry, percent
};

enum class Outcome { Admitted, Blocked };

struct LedgerEntry {
    std::uint64_t id = 0;
    std::int64_t arrival_s = 0;
    std::int64_t iterations = 0;
    Outcome outcome = Outcome::Blocked;
    std::int64_t vm_id = -1;
    std::optional<double> service_time_s;  ///< set once the request completes
};

/// Cumulative counters; windows are differences of two snapshots.
struct ClusterTotals {
    std::int64_t time_s = 0;
    std::uint64_t arrived = 0;
    std::uint64_t admitted = 0;
    std::uint64_t blocked = 0;
    std::uint64_t completed = 0;
    double active_util_sum = 0.0;        ///< sum of samples over active VM-seconds
    std::uint64_t active_samples = 0;
    double per_op_time_sum = 0.0;        ///< sum of service_time / iterations
};

struct EpochRecord {
    std::int64_t index = 0;
    std::int64_t start_s = 0;
    std::int64_t end_s = 0;
    double avg_utilization = 0.0;  ///< percent
    std::uint64_t arrived = 0;
    std::uint64_t blocked = 0;
    std::uint64_t admitted = 0;
    std::uint64_t completed = 0;
    double blocking = 0.0;
    double mean_per_op_time = 0.0;  ///< 0 when nothing completed
    int vms = 0;                    ///< K at window end
};

class Cluster {
public:
    /// Starts with `initial_vms` active VMs at t = 0.
    Cluster(ClusterConfig config, int initial_vms);

    const ClusterConfig& config() const { return config_; }
    std::int64_t now() const { return now_; }
    const std::vector<VirtualMachine>& vms() const { return vms_; }

    /// Active plus booting VMs; draining ones are excluded.
    int vm_count() const;
    int active_count() const;
    /// Every VM that exists, including booting and draining ones.
    int instantiated_count() const;

    /// Load balancer: the active VM with the lowest latest log entry, ties to
    /// the lowest id. Index into vms().
    std::optional<std::size_t> select_vm() const;

    /// LB -> AC -> VM. `admit` sees the selected VM's latest utilization.
    /// A request is blocked when no VM is active or the policy drops it.
    Outcome dispatch(const Request& request, const std::function<bool(double)>& admit);

    /// Places a request on the VM at `index` without consulting any policy.
    void place(const Request& request, std::size_t index);
    void record_block(const Request& request);

    /// Adds (delta > 0) or retires (delta < 0) VMs. Retirement cancels
    /// booting VMs first (newest first), then drains the least-utilized
    /// active VMs. Throws std::out_of_range if K + delta leaves [1, max_vms].
    void scale(int delta);

    /// Advances one 1 s tick.
    void step();

    /// Throws InvariantViolation unless arrived == admitted + blocked and
    /// admitted == completed + in-flight.
    void check_conservation() const;

    std::uint64_t in_flight() const;

    /// Fault injection: discards a running job without completing it, so the
    /// next conservation check fails. Returns false when the VM is idle.
    bool lose_job(std::size_t index);

    const ClusterTotals& totals() const { return totals_; }
    const std::vector<LedgerEntry>& ledger() const { return ledger_; }

    /// VM-hours accumulated tick by tick.
    double vm_hours_by_step() const { return vm_seconds_by_step_ / 3600.0; }
    /// VM-hours summed from individual VM lifetimes.
    double vm_hours_by_lifetime() const;

private:
    VirtualMachine spawn(VmPhase phase);
    void destroy(const VirtualMachine& vm);

    ClusterConfig config_;
    std::int64_t now_ = 0;
    std::uint64_t next_vm_id_ = 0;
    std::vector<VirtualMachine> vms_;
    ClusterTotals totals_;
    std::vector<LedgerEntry> ledger_;
    std::unordered_map<std::uint64_t, std::size_t> ledger_index_;  // request id -> row
    double vm_seconds_by_step_ = 0.0;
    std::int64_t retired_lifetime_s_ = 0;
};

/// Aggregates the window between two snapshots.
EpochRecord epoch_metrics(const ClusterTotals& begin, const ClusterTotals& end, int vms_at_end,
                          std::int64_t index = 0);

const char* to_string(Outcome outcome);

}  // namespace sqlr

#endif  // SQLR_CLOUDSIM_HPP
