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

/// \file report.hpp
/// \brief Run metrics, raw CSV outputs and their read-back.
///
/// Everything in a ReportBundle is a function of the ledger, the per-second
/// VM series and the workload profile, so `report` can rebuild it from the
/// files a run leaves behind.

#ifndef SQLR_REPORT_HPP
#define SQLR_REPORT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqlr/cloudsim.hpp"

namespace sqlr {

/// Trailing mean over min(window, samples so far) values.
std::vector<double> moving_average(std::span<const double> series, std::size_t window = 30);

struct BlockingBin {
    std::int64_t start_s = 0;
    std::uint64_t arrived = 0;
    std::uint64_t blocked = 0;
    double rate = 0.0;  ///< 0 when nothing arrived
};

/// Blocked / arrived per `bin_s` window of arrival time over [0, duration_s).
std::vector<BlockingBin> blocking_series(std::span<const LedgerEntry> ledger, std::int64_t duration_s,
                                         std::int64_t bin_s = 120);

struct CdfPoint {
    double value = 0.0;
    double fraction = 0.0;
};

/// CDF of per-bin blocking rates, each bin weighted by its arrivals.
std::vector<CdfPoint> blocking_cdf(std::span<const BlockingBin> bins);

/// CDF of per-iteration service time (s/op) of completed requests, sampled at
/// `points` evenly spaced quantiles.
std::vector<CdfPoint> service_time_cdf(std::span<const LedgerEntry> ledger, std::size_t points = 201);

/// One second of cluster size.
struct VmSample {
    std::int64_t t_s = 0;
    int vms = 0;           ///< K: active + booting
    int active = 0;
    int instantiated = 0;  ///< includes draining VMs; billed
};

struct HeatCell {
    int vms = 0;
    int load_bin = 0;  ///< offered load in [10 * bin, 10 * bin + 10) requests/min
    std::uint64_t responses = 0;
    std::uint64_t exceeded = 0;
    double frequency = 0.0;  ///< exceeded / responses
    double severity = 0.0;   ///< mean (per-op time - r_sla) over exceeded responses, s/op
    bool suppressed = false;
};

struct Heatmap {
    int load_bin_width = 10;
    std::uint64_t min_responses = 30;
    std::vector<HeatCell> cells;  ///< sorted by (vms, load_bin)
};

/// Soft blocking of completed requests against K at arrival and the offered
/// load of the arrival minute.
Heatmap soft_blocking_heatmap(std::span<const LedgerEntry> ledger, std::span<const VmSample> vm_series,
                              double r_sla, std::uint64_t min_responses = 30);

/// True when a per-op time exceeds r_sla beyond floating-point noise.
bool exceeds_sla(double per_op_time, double r_sla);

struct SlotStats {
    std::size_t index = 0;
    std::int64_t start_s = 0;
    std::int64_t end_s = 0;
    double offered_rate = 0.0;  ///< requests/s
    bool low_traffic = false;   ///< offered rate at or below the median slot
    double mean_vms = 0.0;
    std::uint64_t arrived = 0;
    std::uint64_t blocked = 0;
    double blocking = 0.0;
};

/// Per-slot allocation and blocking.
std::vector<SlotStats> slot_stats(const WorkloadProfile& profile, std::span<const LedgerEntry> ledger,
                                  std::span<const VmSample> vm_series);

struct ReportBundle {
    std::string name;
    std::string scheme;
    std::int64_t duration_s = 0;
    std::uint64_t arrived = 0;
    std::uint64_t admitted = 0;
    std::uint64_t blocked = 0;
    std::uint64_t completed = 0;
    double blocking = 0.0;
    double vm_hours = 0.0;
    double mean_vms = 0.0;
    double soft_blocking = 0.0;  ///< fraction of completed requests over r_sla
    double r_sla = 0.0;
    std::vector<BlockingBin> blocking_bins;
    std::vector<CdfPoint> blocking_distribution;
    std::vector<CdfPoint> service_distribution;
    std::vector<SlotStats> slots;
    Heatmap heatmap;
};

/// `vm_series` covers [0, duration_s); later samples are ignored.
ReportBundle build_report(std::string name, std::string scheme, const WorkloadProfile& profile,
                          std::span<const LedgerEntry> ledger, std::span<const VmSample> vm_series, double r_sla);

nlohmann::json to_json(const ReportBundle& bundle);

// ----------------------------------------------------------------- CSV files

void write_ledger_csv(const std::filesystem::path& path, std::span<const LedgerEntry> ledger);
std::vector<LedgerEntry> read_ledger_csv(const std::filesystem::path& path);

void write_vm_series_csv(const std::filesystem::path& path, std::span<const VmSample> series);
std::vector<VmSample> read_vm_series_csv(const std::filesystem::path& path);

void write_epochs_csv(const std::filesystem::path& path, std::span<const EpochRecord> epochs);

/// Checks a drained run's ledger: ids 0..n-1 in order, blocked rows without
/// a VM or service time, admitted rows with both. Throws InvariantViolation.
void check_ledger_conservation(std::span<const LedgerEntry> ledger);

/// Raised for unreadable or malformed files.
class DataFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sqlr

#endif  // SQLR_REPORT_HPP
