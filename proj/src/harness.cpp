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

#include "sqlr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <set>

#include <fmt/format.h>
#include <omp.h>

#include "sqlr/plot.hpp"

namespace sqlr {

namespace fs = std::filesystem;

const char* to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::Sqlr: return "sqlr";
        case Scheme::Ekf: return "ekf";
        case Scheme::Static: return "static";
    }
    return "?";
}

// ------------------------------------------------------------------ config

namespace {

void check_keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.contains(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        out = obj.at(key).get<T>();
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

Eigen::Matrix2d diagonal(const nlohmann::json& v, const char* what) {
    const auto d = v.get<std::vector<double>>();
    if (d.size() != 2) {
        throw ConfigError(std::string("ekf.") + what + ": expected two diagonal entries");
    }
    return Eigen::Vector2d(d[0], d[1]).asDiagonal();
}

}  // namespace

void ExperimentConfig::validate() const {
    if (epoch_s < 1) {
        throw ConfigError("epoch_s must be >= 1");
    }
    if (!(r_sla > 0.0)) {
        throw ConfigError("r_sla must be > 0");
    }
    try {
        cluster.validate();
        admission.agent.validate();
        ekf.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (initial_vms < 1 || initial_vms > cluster.max_vms) {
        throw ConfigError("initial_vms must lie in [1, cluster.max_vms]");
    }
    if (static_vms < 1 || static_vms > cluster.max_vms) {
        throw ConfigError("static.vms must lie in [1, cluster.max_vms]");
    }
    const auto must_exist = [](const std::optional<fs::path>& p, const char* what) {
        if (p && !fs::exists(*p)) {
            throw ConfigError(std::string(what) + " not found: " + p->string());
        }
    };
    must_exist(std::optional<fs::path>(profile), "workload profile");
    must_exist(admission.table, "admission table");
    must_exist(scaler.table, "scaler table");
    must_exist(scaler.training_profile, "training profile");
}

ExperimentConfig config_from_json(const nlohmann::json& doc, const fs::path& base_dir) {
    ExperimentConfig c;
    try {
        check_keys(doc, "config",
                   {"name", "description", "scheme", "seed", "profile", "epoch_s", "initial_vms", "r_sla", "cluster",
                    "admission", "scaler", "ekf", "static"});
        if (!doc.contains("seed")) {
            throw ConfigError("config: 'seed' is required");
        }
        if (!doc.contains("profile")) {
            throw ConfigError("config: 'profile' is required");
        }
        read(doc, "name", c.name);
        c.seed = doc.at("seed").get<std::uint64_t>();
        c.profile = resolve(base_dir, doc.at("profile").get<std::string>());
        read(doc, "epoch_s", c.epoch_s);
        read(doc, "initial_vms", c.initial_vms);
        read(doc, "r_sla", c.r_sla);

        if (doc.contains("cluster")) {
            const auto& j = doc.at("cluster");
            check_keys(j, "cluster", {"cores", "core_capacity", "max_vms", "boot_s"});
            read(j, "cores", c.cluster.cores);
            read(j, "core_capacity", c.cluster.core_capacity);
            read(j, "max_vms", c.cluster.max_vms);
            read(j, "boot_s", c.cluster.boot_s);
        }
        if (doc.contains("admission")) {
            const auto& j = doc.at("admission");
            check_keys(j, "admission",
                       {"target", "boundary", "convergence_visits", "eps_min", "gamma", "episodes", "table", "limit"});
            read(j, "target", c.admission.agent.target);
            read(j, "boundary", c.admission.agent.boundary);
            read(j, "convergence_visits", c.admission.agent.exploration.convergence_visits);
            read(j, "eps_min", c.admission.agent.exploration.eps_min);
            read(j, "gamma", c.admission.agent.learning.gamma);
            read(j, "episodes", c.admission.episodes);
            if (j.contains("table")) {
                c.admission.table = resolve(base_dir, j.at("table").get<std::string>());
            }
            if (j.contains("limit")) {
                c.admission.limit = j.at("limit").get<int>();
            }
        }
        if (doc.contains("scaler")) {
            const auto& j = doc.at("scaler");
            check_keys(j, "scaler",
                       {"theta", "beta", "r_min", "p_blk", "max_step", "damping", "convergence_visits", "eps_min",
                        "gamma", "learn", "table", "training_profile", "training_episodes"});
            auto& a = c.scaler.agent;
            read(j, "theta", a.reward.theta);
            read(j, "beta", a.reward.beta);
            read(j, "r_min", a.reward.r_min);
            read(j, "p_blk", a.reward.p_blk);
            read(j, "max_step", a.max_step);
            read(j, "damping", a.damping);
            read(j, "convergence_visits", a.exploration.convergence_visits);
            read(j, "eps_min", a.exploration.eps_min);
            read(j, "gamma", a.learning.gamma);
            read(j, "learn", c.scaler.learn);
            read(j, "training_episodes", c.scaler.training_episodes);
            if (j.contains("table")) {
                c.scaler.table = resolve(base_dir, j.at("table").get<std::string>());
            }
            if (j.contains("training_profile")) {
                c.scaler.training_profile = resolve(base_dir, j.at("training_profile").get<std::string>());
            }
        }
        c.ekf = EkfConfig::defaults(c.cluster.vm_capacity(), c.r_sla, c.cluster.max_vms);
        if (doc.contains("ekf")) {
            const auto& j = doc.at("ekf");
            check_keys(j, "ekf",
                       {"interval_s", "initial_service", "process_noise", "measurement_noise", "prior_covariance"});
            read(j, "interval_s", c.ekf.interval_s);
            read(j, "initial_service", c.ekf.initial_service);
            if (j.contains("process_noise")) {
                c.ekf.process_noise = diagonal(j.at("process_noise"), "process_noise");
            }
            if (j.contains("measurement_noise")) {
                c.ekf.measurement_noise = diagonal(j.at("measurement_noise"), "measurement_noise");
            }
            if (j.contains("prior_covariance")) {
                c.ekf.prior_covariance = diagonal(j.at("prior_covariance"), "prior_covariance");
            }
        }
        if (doc.contains("static")) {
            check_keys(doc.at("static"), "static", {"vms"});
            read(doc.at("static"), "vms", c.static_vms);
        }
        if (doc.contains("scheme")) {
            const auto name = doc.at("scheme").get<std::string>();
            const auto keep = c.name;
            apply_scheme(c, name);
            if (doc.contains("name")) {
                c.name = keep;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    const auto doc = read_json_file(path);
    auto c = config_from_json(doc, path.parent_path());
    c.validate();
    return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    const auto diag = [](const Eigen::Matrix2d& m) { return std::vector<double>{m(0, 0), m(1, 1)}; };
    nlohmann::json admission{{"target", c.admission.agent.target},
                             {"boundary", c.admission.agent.boundary},
                             {"convergence_visits", c.admission.agent.exploration.convergence_visits},
                             {"eps_min", c.admission.agent.exploration.eps_min},
                             {"gamma", c.admission.agent.learning.gamma},
                             {"episodes", c.admission.episodes}};
    if (c.admission.table) {
        admission["table"] = c.admission.table->string();
    }
    if (c.admission.limit) {
        admission["limit"] = *c.admission.limit;
    }
    const auto& a = c.scaler.agent;
    nlohmann::json scaler{{"theta", a.reward.theta},
                          {"beta", a.reward.beta},
                          {"r_min", a.reward.r_min},
                          {"p_blk", a.reward.p_blk},
                          {"max_step", a.max_step},
                          {"damping", a.damping},
                          {"convergence_visits", a.exploration.convergence_visits},
                          {"eps_min", a.exploration.eps_min},
                          {"gamma", a.learning.gamma},
                          {"learn", c.scaler.learn},
                          {"training_episodes", c.scaler.training_episodes}};
    if (c.scaler.table) {
        scaler["table"] = c.scaler.table->string();
    }
    if (c.scaler.training_profile) {
        scaler["training_profile"] = c.scaler.training_profile->string();
    }
    return {{"name", c.name},
            {"scheme", to_string(c.scheme)},
            {"seed", c.seed},
            {"profile", c.profile.string()},
            {"epoch_s", c.epoch_s},
            {"initial_vms", c.initial_vms},
            {"r_sla", c.r_sla},
            {"cluster",
             {{"cores", c.cluster.cores},
              {"core_capacity", c.cluster.core_capacity},
              {"max_vms", c.cluster.max_vms},
              {"boot_s", c.cluster.boot_s}}},
            {"admission", std::move(admission)},
            {"scaler", std::move(scaler)},
            {"ekf",
             {{"interval_s", c.ekf.interval_s},
              {"initial_service", c.ekf.initial_service},
              {"process_noise", diag(c.ekf.process_noise)},
              {"measurement_noise", diag(c.ekf.measurement_noise)},
              {"prior_covariance", diag(c.ekf.prior_covariance)}}},
            {"static", {{"vms", c.static_vms}}}};
}

void apply_scheme(ExperimentConfig& c, const std::string& name) {
    if (name == "sqlr") {
        c.scheme = Scheme::Sqlr;
    } else if (name == "sqlr-case1") {
        c.scheme = Scheme::Sqlr;
        c.scaler.agent.reward.theta = 1.0;
        c.scaler.agent.reward.beta = 0.01;
    } else if (name == "sqlr-case2") {
        c.scheme = Scheme::Sqlr;
        c.scaler.agent.reward.theta = 10.0;
        c.scaler.agent.reward.beta = 0.001;
    } else if (name == "ekf") {
        c.scheme = Scheme::Ekf;
    } else if (name == "static") {
        c.scheme = Scheme::Static;
    } else if (name.starts_with("static-")) {
        c.scheme = Scheme::Static;
        try {
            std::size_t used = 0;
            c.static_vms = std::stoi(name.substr(7), &used);
            if (used != name.size() - 7) {
                throw std::invalid_argument(name);
            }
        } catch (const std::exception&) {
            throw ConfigError("unknown scheme '" + name + "'");
        }
    } else {
        throw ConfigError("unknown scheme '" + name + "'");
    }
    c.name = name;
}

std::vector<ExperimentConfig> comparison_configs(const ExperimentConfig& base) {
    std::vector<ExperimentConfig> out;
    for (const char* name : {"sqlr-case1", "sqlr-case2", "ekf", "static-2", "static-10"}) {
        auto c = base;
        apply_scheme(c, name);
        c.static_vms = std::min(c.static_vms, c.cluster.max_vms);
        out.push_back(std::move(c));
    }
    return out;
}

// -------------------------------------------------------------- controllers

SqlrController::SqlrController(ScalingAgent& agent, RandomStream rng, std::int64_t epoch_s, bool learn)
    : agent_(agent), rng_(std::move(rng)), epoch_s_(epoch_s), learn_(learn) {}

int SqlrController::on_interval(const EpochRecord& window, const Cluster& cluster) {
    const int cur = agent_.levels().quantize(window.avg_utilization);
    const int k = cluster.vm_count();
    if (pending_ && learn_) {
        agent_.observe(pending_->first, pending_->second, window.blocking, k, cur);
    }
    const ScalerState s{k, prev_level_.value_or(cur), cur};
    const auto d = agent_.decide(s, rng_);
    prev_level_ = cur;
    pending_ = std::make_pair(s, d.applied);

    DecisionRow row;
    row.index = static_cast<std::int64_t>(decisions_.size());
    row.time_s = window.end_s;
    row.state = s;
    row.selected = d.selected;
    row.applied = d.applied;
    row.avg_utilization = window.avg_utilization;
    row.blocking = window.blocking;
    row.convergence = agent_.convergence_fraction();
    row.visited_states = agent_.table().visited_states();
    decisions_.push_back(row);
    return d.applied;
}

EkfController::EkfController(EkfConfig config, int max_step) : filter_(std::move(config)), max_step_(max_step) {}

int EkfController::on_interval(const EpochRecord& window, const Cluster& cluster) {
    const int k = cluster.vm_count();
    const int serving = std::max(1, cluster.active_count());
    std::optional<double> response;
    if (window.completed > 0) {
        response = window.mean_per_op_time;
    }
    const int target = filter_.cycle(window.avg_utilization / 100.0, response, serving, window.end_s);
    return std::clamp(target - k, -max_step_, max_step_);
}

// --------------------------------------------------------------- simulation

SimulationLog simulate(const SimulationOptions& o, std::span<const Request> arrivals, Controller* controller) {
    if (o.epoch_s < 1) {
        throw std::invalid_argument("simulate: epoch_s must be >= 1");
    }
    Cluster cluster(o.cluster, o.initial_vms);
    const int limit = o.admission_limit;
    const auto admit = [limit](double u) { return admit_below_limit(u, limit); };

    SimulationLog log;
    log.vm_series.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, o.duration_s)));
    ClusterTotals epoch_start = cluster.totals();
    ClusterTotals control_start = cluster.totals();
    std::size_t next = 0;
    bool stop = false;

    for (std::int64_t t = 0; t < o.duration_s && !stop; ++t) {
        for (; next < arrivals.size() && arrivals[next].arrival_s <= t; ++next) {
            if (arrivals[next].arrival_s < t) {
                throw InvariantViolation("simulate: arrivals are not time-ordered");
            }
            cluster.dispatch(arrivals[next], admit);
        }
        log.vm_series.push_back(VmSample{t, cluster.vm_count(), cluster.active_count(), cluster.instantiated_count()});
        cluster.step();
        if (o.after_step) {
            o.after_step(cluster);
        }
        cluster.check_conservation();

        const auto now = cluster.now();
        if (now % o.epoch_s == 0) {
            log.epochs.push_back(epoch_metrics(epoch_start, cluster.totals(), cluster.vm_count(),
                                               static_cast<std::int64_t>(log.epochs.size())));
            epoch_start = cluster.totals();
            stop = o.max_epochs > 0 && log.epochs.size() >= o.max_epochs;
        }
        if (controller && !stop && now < o.duration_s && now % controller->interval_s() == 0) {
            const auto window = epoch_metrics(control_start, cluster.totals(), cluster.vm_count());
            control_start = cluster.totals();
            const int delta = controller->on_interval(window, cluster);
            try {
                cluster.scale(delta);
            } catch (const std::out_of_range& e) {
                throw InvariantViolation(fmt::format("controller asked for delta {} at K={}: {}", delta,
                                                     cluster.vm_count(), e.what()));
            }
        }
    }
    log.vm_hours_step = cluster.vm_hours_by_step();
    log.vm_hours_lifetime = cluster.vm_hours_by_lifetime();
    if (std::abs(log.vm_hours_step - log.vm_hours_lifetime) > 1e-9) {
        throw InvariantViolation(fmt::format("VM-hours disagree: {} by step, {} by lifetime", log.vm_hours_step,
                                             log.vm_hours_lifetime));
    }
    if (o.drain) {
        const auto deadline = cluster.now() + 1'000'000;
        while (cluster.in_flight() > 0) {
            cluster.step();
            cluster.check_conservation();
            if (cluster.now() > deadline) {
                throw InvariantViolation("simulate: jobs still in flight long after the workload ended");
            }
        }
    }
    log.totals = cluster.totals();
    log.ledger = cluster.ledger();
    log.ended_s = cluster.now();
    return log;
}

// ---------------------------------------------------------------- workflows

AdmissionOutcome prepare_admission(const ExperimentConfig& c) {
    AdmissionOutcome out{AdmissionAgent(c.admission.agent), 0, false};
    if (c.admission.limit) {
        out.limit = *c.admission.limit;
        return out;
    }
    if (c.admission.table) {
        out.agent.load_table(read_json_file(*c.admission.table));
    } else {
        AcTrainingOptions options;
        options.episodes = c.admission.episodes;
        options.cores = c.cluster.cores;
        options.core_capacity = c.cluster.core_capacity;
        train_admission(out.agent, options, c.seed);
        out.trained = true;
    }
    out.limit = out.agent.admission_limit();
    return out;
}

ScalingAgent make_scaler(const ExperimentConfig& c, int admission_limit) {
    ScalerConfig sc = c.scaler.agent;
    sc.admission_limit = admission_limit;
    sc.boundary = c.admission.agent.boundary;
    sc.max_vms = c.cluster.max_vms;
    ScalingAgent agent(sc);
    if (c.scaler.table) {
        agent.load_table(read_json_file(*c.scaler.table));
    } else {
        agent.init_diagonals();
    }
    return agent;
}

std::vector<ConvergencePoint> pretrain_scaler(ScalingAgent& agent, const ExperimentConfig& c, std::uint64_t episodes) {
    std::vector<ConvergencePoint> points;
    if (episodes == 0) {
        return points;
    }
    if (!c.scaler.training_profile) {
        throw ConfigError("scaler pre-training needs scaler.training_profile");
    }
    const auto profile = WorkloadProfile::load(*c.scaler.training_profile);
    if (profile.duration_s() < c.epoch_s) {
        throw ConfigError("training profile is shorter than one epoch");
    }
    ClusterConfig cluster = c.cluster;
    cluster.keep_ledger = false;

    std::uint64_t done = 0;
    for (std::uint64_t pass = 0; done < episodes; ++pass) {
        const auto pass_seed = RandomStream::derive(c.seed, fmt::format("scaler-training-pass-{}", pass)).engine()();
        // first pass in file order, later passes with shuffled slots
        auto slots = profile.slots();
        if (pass > 0) {
            std::shuffle(slots.begin(), slots.end(), RandomStream::derive(pass_seed, "slot-order").engine());
        }
        const auto arrivals = generate_arrivals(WorkloadProfile(std::move(slots)), pass_seed);
        SimulationOptions o;
        o.cluster = cluster;
        o.initial_vms = c.initial_vms;
        o.epoch_s = c.epoch_s;
        o.admission_limit = agent.config().admission_limit;
        o.duration_s = profile.duration_s();
        o.drain = false;
        o.max_epochs = episodes - done;
        SqlrController controller(agent, RandomStream::derive(pass_seed, "scaler-exploration"), c.epoch_s, true);
        const auto log = simulate(o, arrivals, &controller);
        for (const auto& row : controller.decisions()) {
            points.push_back({done + static_cast<std::uint64_t>(row.index) + 1, row.convergence, row.visited_states});
        }
        done += log.epochs.size();
    }
    return points;
}

namespace {

struct LowTraffic {
    double mean_vms = 0.0;
    double blocking = 0.0;
};

LowTraffic low_traffic(const ReportBundle& b) {
    double vm_weighted = 0.0;
    double seconds = 0.0;
    std::uint64_t arrived = 0;
    std::uint64_t blocked = 0;
    for (const auto& s : b.slots) {
        if (!s.low_traffic) {
            continue;
        }
        const auto len = static_cast<double>(s.end_s - s.start_s);
        vm_weighted += s.mean_vms * len;
        seconds += len;
        arrived += s.arrived;
        blocked += s.blocked;
    }
    return {seconds > 0.0 ? vm_weighted / seconds : 0.0,
            arrived > 0 ? static_cast<double>(blocked) / static_cast<double>(arrived) : 0.0};
}

void write_decisions_csv(const fs::path& path, std::span<const DecisionRow> rows) {
    std::string text = "index,time_s,vms,prev_level,cur_level,selected,applied,avg_utilization,blocking,convergence\n";
    for (const auto& r : rows) {
        fmt::format_to(std::back_inserter(text), "{},{},{},{},{},{},{},{},{},{}\n", r.index, r.time_s, r.state.vms,
                       r.state.prev_level, r.state.cur_level, r.selected, r.applied, r.avg_utilization, r.blocking,
                       r.convergence);
    }
    write_text_file(path, text);
}

void write_convergence_csv(const fs::path& path, std::span<const ConvergencePoint> points) {
    std::string text = "episode,convergence,visited_states\n";
    for (const auto& p : points) {
        fmt::format_to(std::back_inserter(text), "{},{},{}\n", p.episode, p.fraction, p.visited_states);
    }
    write_text_file(path, text);
}

void write_ekf_trace_csv(const fs::path& path, std::span<const EkfTraceRow> rows) {
    std::string text =
        "cycle,time_s,vms,z_util,z_response,x_demand,x_service,innovation_util,innovation_response,k_target,status\n";
    for (const auto& r : rows) {
        fmt::format_to(std::back_inserter(text), "{},{},{},{},{},{},{},{},{},{},{}\n", r.cycle, r.time_s, r.vms,
                       r.z_util, r.z_response, r.x_demand, r.x_service, r.innovation_util, r.innovation_response,
                       r.k_target, r.status);
    }
    write_text_file(path, text);
}

std::vector<double> per_minute_vms(std::span<const VmSample> series) {
    std::vector<double> out;
    for (std::size_t k = 0; k < series.size(); k += 60) {
        out.push_back(series[k].vms);
    }
    return out;
}

std::vector<double> iota_minutes(std::size_t n, double scale) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = static_cast<double>(k) * scale;
    }
    return x;
}

PlotSeries cdf_series(const std::string& label, std::span<const CdfPoint> cdf, double scale = 1.0) {
    PlotSeries s{label, {}, {}, true};
    for (const auto& p : cdf) {
        s.x.push_back(p.value * scale);
        s.y.push_back(p.fraction);
    }
    return s;
}

PlotSeries blocking_ma_series(const ReportBundle& b) {
    std::vector<double> rates;
    for (const auto& bin : b.blocking_bins) {
        rates.push_back(bin.rate);
    }
    const auto ma = moving_average(rates, 30);
    return {b.name, iota_minutes(ma.size(), 2.0), ma, false};
}

void write_comparison_plots(std::span<const ReportBundle> bundles, std::span<const std::vector<VmSample>> series,
                            const fs::path& dir) {
    LinePlot vm{"VM count", "time (min)", "VMs", {}, false};
    LinePlot blk{"Blocking rate (2-min bins, moving average of 30)", "time (min)", "blocking", {}, false};
    LinePlot bcdf{"Blocking-rate CDF (arrival weighted)", "blocking rate", "CDF", {}, false};
    LinePlot scdf{"Service time per iteration CDF", "service time per iteration (us)", "CDF", {}, true};
    for (std::size_t k = 0; k < bundles.size(); ++k) {
        const auto ys = per_minute_vms(series[k]);
        vm.series.push_back({bundles[k].name, iota_minutes(ys.size(), 1.0), ys, true});
        blk.series.push_back(blocking_ma_series(bundles[k]));
        bcdf.series.push_back(cdf_series(bundles[k].name, bundles[k].blocking_distribution));
        scdf.series.push_back(cdf_series(bundles[k].name, bundles[k].service_distribution, 1e6));
    }
    write_text_file(dir / "vm_count.svg", render_svg(vm));
    write_text_file(dir / "blocking.svg", render_svg(blk));
    write_text_file(dir / "blocking_cdf.svg", render_svg(bcdf));
    write_text_file(dir / "service_time_cdf.svg", render_svg(scdf));
}

std::string summary_table(std::span<const RunSummary> runs) {
    double baseline = 0.0;
    for (const auto& r : runs) {
        if (r.bundle.name == "static-10") {
            baseline = r.bundle.vm_hours;
        }
    }
    std::string md =
        "| scheme | VM-hours | saving vs static-10 | blocking | soft blocking | mean VMs | low-traffic mean VMs | "
        "low-traffic blocking |\n|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : runs) {
        const auto lt = low_traffic(r.bundle);
        const std::string saving =
            baseline > 0.0 ? fmt::format("{:.1f}%", 100.0 * (1.0 - r.bundle.vm_hours / baseline)) : "n/a";
        fmt::format_to(std::back_inserter(md), "| {} | {:.2f} | {} | {:.4f} | {:.4f} | {:.2f} | {:.2f} | {:.4f} |\n",
                       r.bundle.name, r.bundle.vm_hours, saving, r.bundle.blocking, r.bundle.soft_blocking,
                       r.bundle.mean_vms, lt.mean_vms, lt.blocking);
    }
    return md;
}

}  // namespace

void write_run_plots(const ReportBundle& b, std::span<const VmSample> vm_series, const fs::path& dir) {
    std::vector<double> rates;
    for (const auto& bin : b.blocking_bins) {
        rates.push_back(bin.rate);
    }
    const auto x = iota_minutes(rates.size(), 2.0);
    LinePlot blk{b.name + ": blocking rate", "time (min)", "blocking", {}, false};
    blk.series.push_back({"2-min bins", x, rates, true});
    blk.series.push_back({"moving average (30)", x, moving_average(rates, 30), false});
    write_text_file(dir / "blocking.svg", render_svg(blk));

    const auto ys = per_minute_vms(vm_series.subspan(0, std::min<std::size_t>(vm_series.size(), b.duration_s)));
    LinePlot vm{b.name + ": VM count", "time (min)", "VMs", {}, false};
    vm.series.push_back({"K", iota_minutes(ys.size(), 1.0), ys, true});
    write_text_file(dir / "vm_count.svg", render_svg(vm));

    LinePlot bcdf{b.name + ": blocking-rate CDF", "blocking rate", "CDF", {}, false};
    bcdf.series.push_back(cdf_series(b.name, b.blocking_distribution));
    write_text_file(dir / "blocking_cdf.svg", render_svg(bcdf));

    LinePlot scdf{b.name + ": service time per iteration CDF", "us per iteration", "CDF", {}, true};
    scdf.series.push_back(cdf_series(b.name, b.service_distribution, 1e6));
    write_text_file(dir / "service_time_cdf.svg", render_svg(scdf));

    write_text_file(dir / "soft_blocking.svg",
                    render_heatmap_svg(b.heatmap, b.name + ": soft-blocking frequency"));
}

nlohmann::json to_json(const RunSummary& s) {
    const auto lt = low_traffic(s.bundle);
    nlohmann::json j{{"name", s.bundle.name},
                     {"scheme", s.bundle.scheme},
                     {"r_sla", s.bundle.r_sla},
                     {"arrived", s.bundle.arrived},
                     {"admitted", s.bundle.admitted},
                     {"blocked", s.bundle.blocked},
                     {"completed", s.bundle.completed},
                     {"blocking", s.bundle.blocking},
                     {"soft_blocking", s.bundle.soft_blocking},
                     {"vm_hours", s.bundle.vm_hours},
                     {"vm_hours_lifetime", s.vm_hours_lifetime},
                     {"mean_vms", s.bundle.mean_vms},
                     {"low_traffic_mean_vms", lt.mean_vms},
                     {"low_traffic_blocking", lt.blocking},
                     {"admission_limit", s.admission_limit}};
    j["convergence"] = s.convergence ? nlohmann::json(*s.convergence) : nlohmann::json(nullptr);
    return j;
}

RunSummary run_experiment(const ExperimentConfig& c, const fs::path& out) {
    c.validate();
    fs::create_directories(out);
    const auto profile = WorkloadProfile::load(c.profile);

    auto ac = prepare_admission(c);
    if (!c.admission.limit) {
        write_json_file(out / "ac_table.json", ac.agent.table_json());
    }
    auto policy = to_json(ac.agent.summary(), ac.agent.levels());
    policy["x_lim"] = ac.limit;
    write_json_file(out / "ac_policy.json", policy);

    const auto arrivals = generate_arrivals(profile, c.seed);
    SimulationOptions o;
    o.cluster = c.cluster;
    o.initial_vms = c.initial_vms;
    o.epoch_s = c.epoch_s;
    o.admission_limit = ac.limit;
    o.duration_s = profile.duration_s();

    RunSummary summary;
    summary.admission_limit = ac.limit;
    summary.out_dir = out;

    std::optional<ScalingAgent> agent;
    std::unique_ptr<Controller> controller;
    switch (c.scheme) {
        case Scheme::Sqlr: {
            agent.emplace(make_scaler(c, ac.limit));
            if (!c.scaler.table && c.scaler.training_episodes > 0) {
                const auto points = pretrain_scaler(*agent, c, c.scaler.training_episodes);
                write_convergence_csv(out / "convergence.csv", points);
                write_json_file(out / "scaler_pretrained.json", agent->table_json());
            }
            controller = std::make_unique<SqlrController>(*agent, RandomStream::derive(c.seed, "scaler-exploration"),
                                                          c.epoch_s, c.scaler.learn);
            break;
        }
        case Scheme::Ekf:
            controller = std::make_unique<EkfController>(c.ekf, c.scaler.agent.max_step);
            break;
        case Scheme::Static:
            o.initial_vms = c.static_vms;
            break;
    }

    const auto log = simulate(o, arrivals, controller.get());

    write_ledger_csv(out / "ledger.csv", log.ledger);
    write_vm_series_csv(out / "vm_series.csv", log.vm_series);
    write_epochs_csv(out / "epochs.csv", log.epochs);
    write_json_file(out / "profile.json", profile.to_json());
    write_json_file(out / "config.json", to_json(c));
    if (c.scheme == Scheme::Sqlr) {
        const auto& ctl = static_cast<const SqlrController&>(*controller);
        write_decisions_csv(out / "decisions.csv", ctl.decisions());
        write_json_file(out / "scaler_table.json", agent->table_json());
        summary.convergence = agent->convergence_fraction();
    } else if (c.scheme == Scheme::Ekf) {
        write_ekf_trace_csv(out / "ekf_trace.csv", static_cast<const EkfController&>(*controller).filter().trace());
    }

    summary.bundle = build_report(c.name, to_string(c.scheme), profile, log.ledger, log.vm_series, c.r_sla);
    summary.vm_hours_lifetime = log.vm_hours_lifetime;
    if (std::abs(summary.bundle.vm_hours - log.vm_hours_lifetime) > 1e-9) {
        throw InvariantViolation("VM-hours from the VM series disagree with VM lifetimes");
    }
    write_json_file(out / "bundle.json", to_json(summary.bundle));
    write_json_file(out / "summary.json", to_json(summary));
    write_run_plots(summary.bundle, log.vm_series, out / "plots");
    return summary;
}

std::vector<RunSummary> run_comparison(const ExperimentConfig& base, const fs::path& out) {
    const auto configs = comparison_configs(base);
    const auto n = static_cast<int>(configs.size());
    std::vector<std::optional<RunSummary>> results(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());

#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n; ++k) {
        try {
            results[static_cast<std::size_t>(k)] =
                run_experiment(configs[static_cast<std::size_t>(k)], out / configs[static_cast<std::size_t>(k)].name);
        } catch (...) {
            errors[static_cast<std::size_t>(k)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    std::vector<RunSummary> runs;
    std::vector<ReportBundle> bundles;
    std::vector<std::vector<VmSample>> series;
    nlohmann::json index = nlohmann::json::array();
    for (auto& r : results) {
        runs.push_back(std::move(*r));
        bundles.push_back(runs.back().bundle);
        series.push_back(read_vm_series_csv(runs.back().out_dir / "vm_series.csv"));
        index.push_back(to_json(runs.back()));
    }
    write_json_file(out / "compare.json", {{"runs", index}});
    const auto md = summary_table(runs);
    write_text_file(out / "summary.md", md);
    std::string csv = "scheme,vm_hours,blocking,soft_blocking,mean_vms,low_traffic_mean_vms,low_traffic_blocking\n";
    for (const auto& r : runs) {
        const auto lt = low_traffic(r.bundle);
        fmt::format_to(std::back_inserter(csv), "{},{},{},{},{},{},{}\n", r.bundle.name, r.bundle.vm_hours,
                       r.bundle.blocking, r.bundle.soft_blocking, r.bundle.mean_vms, lt.mean_vms, lt.blocking);
    }
    write_text_file(out / "summary.csv", csv);
    write_comparison_plots(bundles, series, out / "plots");
    return runs;
}

namespace {

bool regenerate_run(const fs::path& dir, ReportBundle& bundle, std::vector<VmSample>& series) {
    const auto summary = read_json_file(dir / "summary.json");
    const auto profile = WorkloadProfile::from_json(read_json_file(dir / "profile.json"));
    const auto ledger = read_ledger_csv(dir / "ledger.csv");
    check_ledger_conservation(ledger);
    series = read_vm_series_csv(dir / "vm_series.csv");
    bundle = build_report(summary.at("name").get<std::string>(), summary.at("scheme").get<std::string>(), profile,
                          ledger, series, summary.at("r_sla").get<double>());
    write_run_plots(bundle, series, dir / "plots");
    return to_json(bundle) == read_json_file(dir / "bundle.json");
}

}  // namespace

bool regenerate_report(const fs::path& dir) {
    if (fs::exists(dir / "compare.json")) {
        const auto index = read_json_file(dir / "compare.json");
        bool same = true;
        std::vector<ReportBundle> bundles;
        std::vector<std::vector<VmSample>> series;
        for (const auto& run : index.at("runs")) {
            ReportBundle b;
            std::vector<VmSample> s;
            same = regenerate_run(dir / run.at("name").get<std::string>(), b, s) && same;
            bundles.push_back(std::move(b));
            series.push_back(std::move(s));
        }
        write_comparison_plots(bundles, series, dir / "plots");
        return same;
    }
    ReportBundle b;
    std::vector<VmSample> s;
    return regenerate_run(dir, b, s);
}

}  // namespace sqlr
