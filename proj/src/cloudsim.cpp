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

#include "sqlr/cloudsim.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <tuple>

#include "sqlr/random.hpp"

namespace sqlr {

// ------------------------------------------------------------------ workload

WorkloadProfile::WorkloadProfile(std::vector<WorkloadSlot> slots) : slots_(std::move(slots)) {
    if (slots_.empty()) {
        throw std::invalid_argument("WorkloadProfile: no slots");
    }
    for (const auto& slot : slots_) {
        if (slot.duration_s <= 0) {
            throw std::invalid_argument("WorkloadProfile: slot duration must be positive");
        }
        if (slot.omega_max_s < 1) {
            throw std::invalid_argument("WorkloadProfile: omega_max must be >= 1 s");
        }
        if (slot.multiplier < 0) {
            throw std::invalid_argument("WorkloadProfile: multiplier must be >= 0");
        }
    }
}

WorkloadProfile WorkloadProfile::from_json(const nlohmann::json& doc) {
    const auto& rows = doc.is_object() ? doc.at("slots") : doc;
    std::vector<WorkloadSlot> slots;
    for (const auto& row : rows) {
        slots.push_back(WorkloadSlot{row.at("duration_s").get<std::int64_t>(), row.at("omega_max_s").get<int>(),
                                     row.value("multiplier", 1)});
    }
    return WorkloadProfile(std::move(slots));
}

WorkloadProfile WorkloadProfile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open workload profile " + path.string());
    }
    return from_json(nlohmann::json::parse(in));
}

nlohmann::json WorkloadProfile::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& slot : slots_) {
        out.push_back({{"duration_s", slot.duration_s},
                       {"omega_max_s", slot.omega_max_s},
                       {"multiplier", slot.multiplier}});
    }
    return out;
}

std::int64_t WorkloadProfile::duration_s() const {
    return std::accumulate(slots_.begin(), slots_.end(), std::int64_t{0},
                           [](std::int64_t acc, const WorkloadSlot& s) { return acc + s.duration_s; });
}

std::size_t WorkloadProfile::slot_at(std::int64_t t) const {
    std::int64_t end = 0;
    for (std::size_t k = 0; k < slots_.size(); ++k) {
        end += slots_[k].duration_s;
        if (t < end) {
            return k;
        }
    }
    return slots_.size() - 1;
}

std::int64_t WorkloadProfile::slot_start(std::size_t index) const {
    std::int64_t start = 0;
    for (std::size_t k = 0; k < index && k < slots_.size(); ++k) {
        start += slots_[k].duration_s;
    }
    return start;
}

std::vector<Request> generate_arrivals(const WorkloadProfile& profile, std::uint64_t seed) {
    auto rng = RandomStream::derive(seed, "arrivals");
    // (time, stream, sequence) orders simultaneous arrivals deterministically.
    std::vector<std::tuple<std::int64_t, int, std::uint64_t, std::int64_t>> raw;
    std::int64_t slot_begin = 0;
    std::uint64_t sequence = 0;
    for (const auto& slot : profile.slots()) {
        const std::int64_t slot_end = slot_begin + slot.duration_s;
        for (int stream = 0; stream < slot.multiplier; ++stream) {
            std::int64_t t = slot_begin;
            while (true) {
                t += rng.uniform_int(0, slot.omega_max_s);
                if (t >= slot_end) {
                    break;
                }
                const auto pick = rng.uniform_int(0, static_cast<std::int64_t>(kIterationChoices.size()) - 1);
                raw.emplace_back(t, stream, sequence++, kIterationChoices[static_cast<std::size_t>(pick)]);
            }
        }
        slot_begin = slot_end;
    }
    std::sort(raw.begin(), raw.end());
    std::vector<Request> out;
    out.reserve(raw.size());
    for (const auto& [t, stream, seq, iterations] : raw) {
        out.push_back(Request{static_cast<std::uint64_t>(out.size()), t, iterations});
    }
    return out;
}

// ------------------------------------------------------------------- cluster

void ClusterConfig::validate() const {
    if (cores < 1) {
        throw std::invalid_argument("ClusterConfig: cores must be >= 1");
    }
    if (!(core_capacity > 0.0)) {
        throw std::invalid_argument("ClusterConfig: core capacity must be positive");
    }
    if (max_vms < 1) {
        throw std::invalid_argument("ClusterConfig: max_vms must be >= 1");
    }
    if (boot_s < 0) {
        throw std::invalid_argument("ClusterConfig: boot delay must be >= 0");
    }
}

Cluster::Cluster(ClusterConfig config, int initial_vms) : config_(config) {
    config_.validate();
    if (initial_vms < 1 || initial_vms > config_.max_vms) {
        throw std::out_of_range("Cluster: initial VM count outside [1, max_vms]");
    }
    for (int k = 0; k < initial_vms; ++k) {
        vms_.push_back(spawn(VmPhase::Active));
    }
}

VirtualMachine Cluster::spawn(VmPhase phase) {
    VirtualMachine vm;
    vm.id = next_vm_id_++;
    vm.phase = phase;
    vm.boot_remaining = phase == VmPhase::Booting ? config_.boot_s : 0;
    vm.created_s = now_;
    return vm;
}

void Cluster::destroy(const VirtualMachine& vm) {
    retired_lifetime_s_ += now_ - vm.created_s;
}

int Cluster::vm_count() const {
    return static_cast<int>(std::count_if(vms_.begin(), vms_.end(),
                                          [](const VirtualMachine& vm) { return vm.phase != VmPhase::Draining; }));
}

int Cluster::active_count() const {
    return static_cast<int>(std::count_if(vms_.begin(), vms_.end(),
                                          [](const VirtualMachine& vm) { return vm.phase == VmPhase::Active; }));
}

int Cluster::instantiated_count() const {
    return static_cast<int>(vms_.size());
}

std::optional<std::size_t> Cluster::select_vm() const {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < vms_.size(); ++k) {
        if (vms_[k].phase != VmPhase::Active) {
            continue;
        }
        if (!best || vms_[k].last_sample < vms_[*best].last_sample) {
            best = k;
        }
    }
    return best;
}

void Cluster::record_block(const Request& request) {
    ++totals_.arrived;
    ++totals_.blocked;
    if (config_.keep_ledger) {
        ledger_index_[request.id] = ledger_.size();
        ledger_.push_back(LedgerEntry{request.id, request.arrival_s, request.iterations, Outcome::Blocked, -1, {}});
    }
}

void Cluster::place(const Request& request, std::size_t index) {
    auto& vm = vms_.at(index);
    if (vm.phase != VmPhase::Active) {
        throw InvariantViolation("place: target VM is not active");
    }
    ++totals_.arrived;
    ++totals_.admitted;
    vm.jobs.push_back(Job{request.id, request.arrival_s, request.iterations, static_cast<double>(request.iterations)});
    if (config_.keep_ledger) {
        ledger_index_[request.id] = ledger_.size();
        ledger_.push_back(LedgerEntry{request.id, request.arrival_s, request.iterations, Outcome::Admitted,
                                      static_cast<std::int64_t>(vm.id), {}});
    }
}

Outcome Cluster::dispatch(const Request& request, const std::function<bool(double)>& admit) {
    const auto target = select_vm();
    if (!target || !admit(vms_[*target].last_sample)) {
        record_block(request);
        return Outcome::Blocked;
    }
    place(request, *target);
    return Outcome::Admitted;
}

void Cluster::scale(int delta) {
    const int k = vm_count();
    if (k + delta < 1 || k + delta > config_.max_vms) {
        throw std::out_of_range("scale: VM count would leave [1, max_vms]");
    }
    for (int n = 0; n < delta; ++n) {
        vms_.push_back(spawn(config_.boot_s == 0 ? VmPhase::Active : VmPhase::Booting));
    }
    int to_remove = -delta;
    // Booting VMs hold no work; cancel the newest ones first.
    for (auto it = vms_.rbegin(); it != vms_.rend() && to_remove > 0;) {
        if (it->phase == VmPhase::Booting) {
            destroy(*it);
            it = std::make_reverse_iterator(vms_.erase(std::next(it).base()));
            --to_remove;
        } else {
            ++it;
        }
    }
    while (to_remove > 0) {
        std::optional<std::size_t> victim;
        for (std::size_t n = 0; n < vms_.size(); ++n) {
            if (vms_[n].phase != VmPhase::Active) {
                continue;
            }
            if (!victim || vms_[n].last_sample < vms_[*victim].last_sample) {
                victim = n;
            }
        }
        if (!victim) {
            throw InvariantViolation("scale: no active VM left to drain");
        }
        vms_[*victim].phase = VmPhase::Draining;
        --to_remove;
    }
}

void Cluster::step() {
    const double tick_start = static_cast<double>(now_);
    const double vm_capacity = config_.vm_capacity();
    vm_seconds_by_step_ += static_cast<double>(vms_.size());

    for (auto& vm : vms_) {
        if (vm.phase == VmPhase::Booting) {
            vm.last_sample = 0.0;
            continue;
        }
        double busy_ops = 0.0;
        if (!vm.jobs.empty()) {
            const double rate = std::min(config_.core_capacity,
                                         vm_capacity / static_cast<double>(vm.jobs.size()));
            std::vector<Job> running;
            running.reserve(vm.jobs.size());
            for (auto& job : vm.jobs) {
                if (job.remaining <= rate) {
                    busy_ops += job.remaining;
                    const double finish = tick_start + job.remaining / rate;
                    const double service = finish - static_cast<double>(job.arrival_s);
                    ++totals_.completed;
                    totals_.per_op_time_sum += service / static_cast<double>(job.iterations);
                    if (config_.keep_ledger) {
                        ledger_[ledger_index_.at(job.request_id)].service_time_s = service;
                        ledger_index_.erase(job.request_id);
                    }
                } else {
                    busy_ops += rate;
                    job.remaining -= rate;
                    running.push_back(job);
                }
            }
            vm.jobs = std::move(running);
        }
        vm.last_sample = std::min(100.0, 100.0 * busy_ops / vm_capacity);
        if (vm.phase == VmPhase::Active) {
            totals_.active_util_sum += vm.last_sample;
            ++totals_.active_samples;
        }
    }

    ++now_;
    totals_.time_s = now_;

    for (auto& vm : vms_) {
        if (vm.phase == VmPhase::Booting && --vm.boot_remaining <= 0) {
            vm.phase = VmPhase::Active;
            vm.last_sample = 0.0;
        }
    }
    std::erase_if(vms_, [this](const VirtualMachine& vm) {
        if (vm.phase == VmPhase::Draining && vm.jobs.empty()) {
            destroy(vm);
            return true;
        }
        return false;
    });
}

std::uint64_t Cluster::in_flight() const {
    std::uint64_t jobs = 0;
    for (const auto& vm : vms_) {
        jobs += vm.jobs.size();
    }
    return jobs;
}

void Cluster::check_conservation() const {
    if (totals_.arrived != totals_.admitted + totals_.blocked) {
        throw InvariantViolation("conservation: arrived != admitted + blocked at t=" + std::to_string(now_));
    }
    if (totals_.admitted != totals_.completed + in_flight()) {
        throw InvariantViolation("conservation: admitted != completed + in-flight at t=" + std::to_string(now_));
    }
}

bool Cluster::lose_job(std::size_t index) {
    auto& jobs = vms_.at(index).jobs;
    if (jobs.empty()) {
        return false;
    }
    jobs.pop_back();
    return true;
}

double Cluster::vm_hours_by_lifetime() const {
    std::int64_t seconds = retired_lifetime_s_;
    for (const auto& vm : vms_) {
        seconds += now_ - vm.created_s;
    }
    return static_cast<double>(seconds) / 3600.0;
}

EpochRecord epoch_metrics(const ClusterTotals& begin, const ClusterTotals& end, int vms_at_end, std::int64_t index) {
    EpochRecord rec;
    rec.index = index;
    rec.start_s = begin.time_s;
    rec.end_s = end.time_s;
    rec.arrived = end.arrived - begin.arrived;
    rec.blocked = end.blocked - begin.blocked;
    rec.admitted = end.admitted - begin.admitted;
    rec.completed = end.completed - begin.completed;
    const auto samples = end.active_samples - begin.active_samples;
    rec.avg_utilization =
        samples == 0 ? 0.0 : (end.active_util_sum - begin.active_util_sum) / static_cast<double>(samples);
    rec.blocking = rec.arrived == 0 ? 0.0 : static_cast<double>(rec.blocked) / static_cast<double>(rec.arrived);
    rec.mean_per_op_time =
        rec.completed == 0 ? 0.0 : (end.per_op_time_sum - begin.per_op_time_sum) / static_cast<double>(rec.completed);
    rec.vms = vms_at_end;
    return rec;
}

const char* to_string(Outcome outcome) {
    return outcome == Outcome::Admitted ? "admitted" : "blocked";
}

}  // namespace sqlr
