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

#include "sqlr/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/os.h>

namespace sqlr {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
T parse_number(std::string_view field, const std::filesystem::path& path, std::size_t row) {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw DataFileError(fmt::format("{}:{}: bad number '{}'", path.string(), row, field));
    }
    return value;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, std::string_view header) {
    std::ifstream in(path);
    if (!in) {
        throw DataFileError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw DataFileError(path.string() + ": unexpected header");
    }
    const auto columns = split(header).size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != columns) {
            throw DataFileError(fmt::format("{}:{}: expected {} fields", path.string(), rows.size() + 2, columns));
        }
        rows.emplace_back(fields.begin(), fields.end());
    }
    return rows;
}

double median(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

nlohmann::json cdf_json(std::span<const CdfPoint> points) {
    auto out = nlohmann::json::array();
    for (const auto& p : points) {
        out.push_back({p.value, p.fraction});
    }
    return out;
}

}  // namespace

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
    if (window == 0) {
        throw std::invalid_argument("moving_average: window must be >= 1");
    }
    std::vector<double> out;
    out.reserve(series.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        sum += series[k];
        if (k >= window) {
            sum -= series[k - window];
        }
        out.push_back(sum / static_cast<double>(std::min(window, k + 1)));
    }
    return out;
}

std::vector<BlockingBin> blocking_series(std::span<const LedgerEntry> ledger, std::int64_t duration_s,
                                         std::int64_t bin_s) {
    if (bin_s < 1) {
        throw std::invalid_argument("blocking_series: bin width must be >= 1");
    }
    const auto bins = static_cast<std::size_t>((duration_s + bin_s - 1) / bin_s);
    std::vector<BlockingBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].start_s = static_cast<std::int64_t>(b) * bin_s;
    }
    for (const auto& e : ledger) {
        if (e.arrival_s < 0 || e.arrival_s >= duration_s) {
            continue;
        }
        auto& bin = out[static_cast<std::size_t>(e.arrival_s / bin_s)];
        ++bin.arrived;
        bin.blocked += e.outcome == Outcome::Blocked ? 1 : 0;
    }
    for (auto& bin : out) {
        bin.rate = bin.arrived == 0 ? 0.0 : static_cast<double>(bin.blocked) / static_cast<double>(bin.arrived);
    }
    return out;
}

std::vector<CdfPoint> blocking_cdf(std::span<const BlockingBin> bins) {
    std::vector<BlockingBin> sorted;
    for (const auto& b : bins) {
        if (b.arrived > 0) {
            sorted.push_back(b);
        }
    }
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const BlockingBin& a, const BlockingBin& b) { return a.rate < b.rate; });
    std::uint64_t total = 0;
    for (const auto& b : sorted) {
        total += b.arrived;
    }
    std::vector<CdfPoint> out;
    std::uint64_t acc = 0;
    for (const auto& b : sorted) {
        acc += b.arrived;
        const double frac = static_cast<double>(acc) / static_cast<double>(total);
        if (!out.empty() && out.back().value == b.rate) {
            out.back().fraction = frac;
        } else {
            out.push_back({b.rate, frac});
        }
    }
    return out;
}

std::vector<CdfPoint> service_time_cdf(std::span<const LedgerEntry> ledger, std::size_t points) {
    std::vector<double> per_op;
    for (const auto& e : ledger) {
        if (e.service_time_s) {
            per_op.push_back(*e.service_time_s / static_cast<double>(e.iterations));
        }
    }
    std::vector<CdfPoint> out;
    if (per_op.empty() || points < 2) {
        return out;
    }
    std::sort(per_op.begin(), per_op.end());
    const auto n = per_op.size();
    for (std::size_t k = 0; k < points; ++k) {
        const double q = static_cast<double>(k) / static_cast<double>(points - 1);
        const auto rank = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(q * static_cast<double>(n))));
        const auto idx = std::min(rank, n) - 1;
        const CdfPoint p{per_op[idx], static_cast<double>(idx + 1) / static_cast<double>(n)};
        if (!out.empty() && out.back().value == p.value) {
            out.back().fraction = p.fraction;
        } else {
            out.push_back(p);
        }
    }
    return out;
}

bool exceeds_sla(double per_op_time, double r_sla) {
    return per_op_time > r_sla * (1.0 + 1e-9);
}

Heatmap soft_blocking_heatmap(std::span<const LedgerEntry> ledger, std::span<const VmSample> vm_series,
                              double r_sla, std::uint64_t min_responses) {
    Heatmap map;
    map.min_responses = min_responses;
    std::map<std::int64_t, std::uint64_t> per_minute;
    for (const auto& e : ledger) {
        ++per_minute[e.arrival_s / 60];
    }
    std::map<std::pair<int, int>, HeatCell> cells;
    for (const auto& e : ledger) {
        if (!e.service_time_s || e.arrival_s < 0 || e.arrival_s >= static_cast<std::int64_t>(vm_series.size())) {
            continue;
        }
        const int vms = vm_series[static_cast<std::size_t>(e.arrival_s)].vms;
        const int bin = static_cast<int>(per_minute[e.arrival_s / 60] / static_cast<std::uint64_t>(map.load_bin_width));
        auto& cell = cells[{vms, bin}];
        cell.vms = vms;
        cell.load_bin = bin;
        ++cell.responses;
        const double per_op = *e.service_time_s / static_cast<double>(e.iterations);
        if (exceeds_sla(per_op, r_sla)) {
            ++cell.exceeded;
            cell.severity += per_op - r_sla;
        }
    }
    for (auto& [key, cell] : cells) {
        cell.frequency = static_cast<double>(cell.exceeded) / static_cast<double>(cell.responses);
        cell.severity = cell.exceeded == 0 ? 0.0 : cell.severity / static_cast<double>(cell.exceeded);
        cell.suppressed = cell.responses < min_responses;
        map.cells.push_back(cell);
    }
    return map;
}

std::vector<SlotStats> slot_stats(const WorkloadProfile& profile, std::span<const LedgerEntry> ledger,
                                  std::span<const VmSample> vm_series) {
    std::vector<SlotStats> out;
    std::vector<double> rates;
    for (std::size_t k = 0; k < profile.slots().size(); ++k) {
        const auto& slot = profile.slots()[k];
        SlotStats s;
        s.index = k;
        s.start_s = profile.slot_start(k);
        s.end_s = s.start_s + slot.duration_s;
        const double mean_gap = 0.5 * slot.omega_max_s;
        s.offered_rate = mean_gap > 0.0 ? slot.multiplier / mean_gap : static_cast<double>(slot.multiplier);
        rates.push_back(s.offered_rate);
        double vm_sum = 0.0;
        std::int64_t samples = 0;
        for (const auto& v : vm_series) {
            if (v.t_s >= s.start_s && v.t_s < s.end_s) {
                vm_sum += v.vms;
                ++samples;
            }
        }
        s.mean_vms = samples == 0 ? 0.0 : vm_sum / static_cast<double>(samples);
        out.push_back(s);
    }
    const double mid = median(rates);
    for (auto& s : out) {
        s.low_traffic = s.offered_rate <= mid;
    }
    for (const auto& e : ledger) {
        if (e.arrival_s < 0 || e.arrival_s >= profile.duration_s()) {
            continue;
        }
        auto& s = out[profile.slot_at(e.arrival_s)];
        ++s.arrived;
        s.blocked += e.outcome == Outcome::Blocked ? 1 : 0;
    }
    for (auto& s : out) {
        s.blocking = s.arrived == 0 ? 0.0 : static_cast<double>(s.blocked) / static_cast<double>(s.arrived);
    }
    return out;
}

ReportBundle build_report(std::string name, std::string scheme, const WorkloadProfile& profile,
                          std::span<const LedgerEntry> ledger, std::span<const VmSample> vm_series, double r_sla) {
    ReportBundle b;
    b.name = std::move(name);
    b.scheme = std::move(scheme);
    b.duration_s = profile.duration_s();
    b.r_sla = r_sla;
    const auto horizon = std::min<std::size_t>(vm_series.size(), static_cast<std::size_t>(b.duration_s));
    const auto series = vm_series.subspan(0, horizon);

    std::uint64_t over = 0;
    for (const auto& e : ledger) {
        ++b.arrived;
        if (e.outcome == Outcome::Blocked) {
            ++b.blocked;
            continue;
        }
        ++b.admitted;
        if (e.service_time_s) {
            ++b.completed;
            over += exceeds_sla(*e.service_time_s / static_cast<double>(e.iterations), r_sla) ? 1 : 0;
        }
    }
    b.blocking = b.arrived == 0 ? 0.0 : static_cast<double>(b.blocked) / static_cast<double>(b.arrived);
    b.soft_blocking = b.completed == 0 ? 0.0 : static_cast<double>(over) / static_cast<double>(b.completed);

    std::int64_t vm_seconds = 0;
    std::int64_t k_sum = 0;
    for (const auto& v : series) {
        vm_seconds += v.instantiated;
        k_sum += v.vms;
    }
    b.vm_hours = static_cast<double>(vm_seconds) / 3600.0;
    b.mean_vms = series.empty() ? 0.0 : static_cast<double>(k_sum) / static_cast<double>(series.size());

    b.blocking_bins = blocking_series(ledger, b.duration_s);
    b.blocking_distribution = blocking_cdf(b.blocking_bins);
    b.service_distribution = service_time_cdf(ledger);
    b.slots = slot_stats(profile, ledger, series);
    b.heatmap = soft_blocking_heatmap(ledger, series, r_sla);
    return b;
}

nlohmann::json to_json(const ReportBundle& b) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& bin : b.blocking_bins) {
        bins.push_back({{"start_s", bin.start_s}, {"arrived", bin.arrived}, {"blocked", bin.blocked}, {"rate", bin.rate}});
    }
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : b.slots) {
        slots.push_back({{"index", s.index},
                         {"start_s", s.start_s},
                         {"end_s", s.end_s},
                         {"offered_rate", s.offered_rate},
                         {"low_traffic", s.low_traffic},
                         {"mean_vms", s.mean_vms},
                         {"arrived", s.arrived},
                         {"blocked", s.blocked},
                         {"blocking", s.blocking}});
    }
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : b.heatmap.cells) {
        cells.push_back({{"vms", c.vms},
                         {"load_bin", c.load_bin},
                         {"responses", c.responses},
                         {"exceeded", c.exceeded},
                         {"frequency", c.frequency},
                         {"severity", c.severity},
                         {"suppressed", c.suppressed}});
    }
    return {{"name", b.name},
            {"scheme", b.scheme},
            {"duration_s", b.duration_s},
            {"arrived", b.arrived},
            {"admitted", b.admitted},
            {"blocked", b.blocked},
            {"completed", b.completed},
            {"blocking", b.blocking},
            {"vm_hours", b.vm_hours},
            {"mean_vms", b.mean_vms},
            {"soft_blocking", b.soft_blocking},
            {"r_sla", b.r_sla},
            {"blocking_series", std::move(bins)},
            {"blocking_cdf", cdf_json(b.blocking_distribution)},
            {"service_time_cdf", cdf_json(b.service_distribution)},
            {"slots", std::move(slots)},
            {"heatmap",
             {{"load_bin_width", b.heatmap.load_bin_width},
              {"min_responses", b.heatmap.min_responses},
              {"cells", std::move(cells)}}}};
}

// ----------------------------------------------------------------- CSV files

namespace {

constexpr std::string_view kLedgerHeader = "id,arrival_s,iterations,outcome,vm_id,service_time_s";
constexpr std::string_view kVmHeader = "t_s,vms,active,instantiated";

}  // namespace

void write_ledger_csv(const std::filesystem::path& path, std::span<const LedgerEntry> ledger) {
    std::string text = fmt::format("{}\n", kLedgerHeader);
    for (const auto& e : ledger) {
        fmt::format_to(std::back_inserter(text), "{},{},{},{},", e.id, e.arrival_s, e.iterations, to_string(e.outcome));
        if (e.outcome == Outcome::Admitted) {
            fmt::format_to(std::back_inserter(text), "{}", e.vm_id);
        }
        text += ',';
        if (e.service_time_s) {
            fmt::format_to(std::back_inserter(text), "{}", *e.service_time_s);
        }
        text += '\n';
    }
    write_text_file(path, text);
}

std::vector<LedgerEntry> read_ledger_csv(const std::filesystem::path& path) {
    std::vector<LedgerEntry> out;
    std::size_t row = 1;
    for (const auto& f : read_csv(path, kLedgerHeader)) {
        ++row;
        LedgerEntry e;
        e.id = parse_number<std::uint64_t>(f[0], path, row);
        e.arrival_s = parse_number<std::int64_t>(f[1], path, row);
        e.iterations = parse_number<std::int64_t>(f[2], path, row);
        if (f[3] == "admitted") {
            e.outcome = Outcome::Admitted;
        } else if (f[3] == "blocked") {
            e.outcome = Outcome::Blocked;
        } else {
            throw DataFileError(fmt::format("{}:{}: bad outcome '{}'", path.string(), row, f[3]));
        }
        e.vm_id = f[4].empty() ? -1 : parse_number<std::int64_t>(f[4], path, row);
        if (!f[5].empty()) {
            e.service_time_s = parse_number<double>(f[5], path, row);
        }
        out.push_back(e);
    }
    return out;
}

void write_vm_series_csv(const std::filesystem::path& path, std::span<const VmSample> series) {
    std::string text = fmt::format("{}\n", kVmHeader);
    for (const auto& v : series) {
        fmt::format_to(std::back_inserter(text), "{},{},{},{}\n", v.t_s, v.vms, v.active, v.instantiated);
    }
    write_text_file(path, text);
}

std::vector<VmSample> read_vm_series_csv(const std::filesystem::path& path) {
    std::vector<VmSample> out;
    std::size_t row = 1;
    for (const auto& f : read_csv(path, kVmHeader)) {
        ++row;
        out.push_back(VmSample{parse_number<std::int64_t>(f[0], path, row), parse_number<int>(f[1], path, row),
                               parse_number<int>(f[2], path, row), parse_number<int>(f[3], path, row)});
    }
    return out;
}

void write_epochs_csv(const std::filesystem::path& path, std::span<const EpochRecord> epochs) {
    std::string text =
        "index,start_s,end_s,avg_utilization,arrived,admitted,blocked,completed,blocking,mean_per_op_time,vms\n";
    for (const auto& e : epochs) {
        fmt::format_to(std::back_inserter(text), "{},{},{},{},{},{},{},{},{},{},{}\n", e.index, e.start_s, e.end_s,
                       e.avg_utilization, e.arrived, e.admitted, e.blocked, e.completed, e.blocking,
                       e.mean_per_op_time, e.vms);
    }
    write_text_file(path, text);
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataFileError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataFileError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataFileError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw DataFileError("write failed: " + path.string());
    }
}

void check_ledger_conservation(std::span<const LedgerEntry> ledger) {
    for (std::size_t k = 0; k < ledger.size(); ++k) {
        const auto& e = ledger[k];
        if (e.id != k) {
            throw InvariantViolation(fmt::format("ledger: row {} has id {}", k, e.id));
        }
        const bool admitted = e.outcome == Outcome::Admitted;
        if (admitted != (e.vm_id >= 0) || admitted != e.service_time_s.has_value()) {
            throw InvariantViolation(fmt::format("ledger: request {} is neither completed nor blocked", e.id));
        }
    }
}

}  // namespace sqlr
