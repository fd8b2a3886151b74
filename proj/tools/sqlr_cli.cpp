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

// sqlr: train agents, run and compare provisioning schemes, rebuild reports.
//
// Exit codes: 0 ok, 1 usage, 2 config or I/O, 3 invariant violation.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sqlr/harness.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kConfig = 2;
constexpr int kInvariant = 3;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::optional<std::string> scheme;
    std::optional<std::uint64_t> episodes;
};

sqlr::ExperimentConfig load(const Options& opt) {
    auto c = sqlr::load_config(opt.config);
    if (opt.seed) {
        c.seed = *opt.seed;
    }
    if (opt.scheme) {
        sqlr::apply_scheme(c, *opt.scheme);
    }
    c.validate();
    return c;
}

void print_summary(const sqlr::RunSummary& s) {
    fmt::print("{:<12} x_lim={} VM-hours={:.3f} blocking={:.4f} soft-blocking={:.4f} mean VMs={:.2f}", s.bundle.name,
               s.admission_limit, s.bundle.vm_hours, s.bundle.blocking, s.bundle.soft_blocking, s.bundle.mean_vms);
    if (s.convergence) {
        fmt::print(" convergence={:.3f}", *s.convergence);
    }
    fmt::print("\n");
}

int train_ac(const Options& opt) {
    auto c = load(opt);
    c.admission.table.reset();
    c.admission.limit.reset();
    if (opt.episodes) {
        c.admission.episodes = *opt.episodes;
    }
    const auto ac = sqlr::prepare_admission(c);
    const fs::path out(opt.out);
    sqlr::write_json_file(out / "ac_table.json", ac.agent.table_json());
    sqlr::write_json_file(out / "ac_policy.json", sqlr::to_json(ac.agent.summary(), ac.agent.levels()));
    fmt::print("x_lim={} episodes={}\n", ac.limit, c.admission.episodes);
    return kOk;
}

int train_scaler(const Options& opt) {
    auto c = load(opt);
    c.scaler.table.reset();
    const auto episodes = opt.episodes.value_or(c.scaler.training_episodes);
    const auto ac = sqlr::prepare_admission(c);
    auto agent = sqlr::make_scaler(c, ac.limit);
    const auto points = sqlr::pretrain_scaler(agent, c, episodes);
    const fs::path out(opt.out);
    sqlr::write_json_file(out / "scaler_table.json", agent.table_json());
    std::string csv = "episode,convergence,visited_states\n";
    for (const auto& p : points) {
        csv += fmt::format("{},{},{}\n", p.episode, p.fraction, p.visited_states);
    }
    sqlr::write_text_file(out / "convergence.csv", csv);
    fmt::print("x_lim={} episodes={} visited states={} convergence={:.3f}\n", ac.limit, episodes,
               agent.table().visited_states(), agent.convergence_fraction());
    return kOk;
}

int run(const Options& opt) {
    print_summary(sqlr::run_experiment(load(opt), opt.out));
    return kOk;
}

int compare(const Options& opt) {
    const auto runs = sqlr::run_comparison(load(opt), opt.out);
    for (const auto& r : runs) {
        print_summary(r);
    }
    fmt::print("\nsummary table: {}\n", (fs::path(opt.out) / "summary.md").string());
    return kOk;
}

int report(const Options& opt) {
    const bool same = sqlr::regenerate_report(opt.out);
    if (!same) {
        fmt::print(stderr, "report: rebuilt bundle differs from the stored bundle.json\n");
        return kInvariant;
    }
    fmt::print("report: plots rebuilt under {}, bundles reproduced\n", opt.out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SQLR elastic-provisioning simulator"};
    app.require_subcommand(1);
    Options opt;

    const auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* cfg = sub->add_option("--config", opt.config, "experiment config (JSON)");
        if (needs_config) {
            cfg->required();
        }
        sub->add_option("--seed", opt.seed, "master seed (overrides the config)");
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    };

    auto* ac = app.add_subcommand("train-ac", "train the admission-control agent");
    add_common(ac, true);
    ac->add_option("--episodes", opt.episodes, "training episodes");

    auto* sc = app.add_subcommand("train-scaler", "pre-train the scaling agent on the training profile");
    add_common(sc, true);
    sc->add_option("--episodes", opt.episodes, "scaler epochs");

    auto* rn = app.add_subcommand("run", "run one experiment");
    add_common(rn, true);
    rn->add_option("--scheme", opt.scheme, "sqlr | sqlr-case1 | sqlr-case2 | ekf | static | static-<K>");

    auto* cmp = app.add_subcommand("compare", "run sqlr-case1, sqlr-case2, ekf, static-2 and static-10");
    add_common(cmp, true);

    auto* rep = app.add_subcommand("report", "rebuild plots from a run or compare directory");
    rep->add_option("--out", opt.out, "run or compare output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kUsage;
    }

    try {
        if (ac->parsed()) {
            return train_ac(opt);
        }
        if (sc->parsed()) {
            return train_scaler(opt);
        }
        if (rn->parsed()) {
            return run(opt);
        }
        if (cmp->parsed()) {
            return compare(opt);
        }
        return report(opt);
    } catch (const sqlr::InvariantViolation& e) {
        fmt::print(stderr, "invariant violation: {}\n", e.what());
        return kInvariant;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kConfig;
    }
}
