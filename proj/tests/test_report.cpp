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


#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "sqlr/plot.hpp"
#include "sqlr/report.hpp"

using namespace sqlr;

namespace fs = std::filesystem;

namespace {

LedgerEntry admitted(std::uint64_t id, std::int64_t t, double service, std::int64_t iterations = 1'000'000) {
    return LedgerEntry{id, t, iterations, Outcome::Admitted, 0, service};
}

LedgerEntry blocked(std::uint64_t id, std::int64_t t) { return LedgerEntry{id, t, 500'000, Outcome::Blocked, -1, {}}; }

fs::path scratch(const char* name) {
    const auto dir = fs::temp_directory_path() / "sqlr_report_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("moving average") {
    CHECK(moving_average(std::vector<double>{}).empty());
    CHECK(moving_average(std::vector<double>{1, 2, 3}, 2) == std::vector<double>{1, 1.5, 2.5});
    const std::vector<double> c(50, 3.0);
    for (const double v : moving_average(c, 30)) {
        CHECK(v == 3.0);
    }
    const std::vector<double> s{4, 1, 7, 2};
    CHECK(moving_average(s, 1) == s);
    CHECK_THROWS(moving_average(s, 0));
}

TEST_CASE("blocking series") {
    std::vector<LedgerEntry> all_in;
    std::vector<LedgerEntry> all_out;
    for (std::uint64_t k = 0; k < 10; ++k) {
        all_in.push_back(admitted(k, static_cast<std::int64_t>(k) * 30, 5.0));
        all_out.push_back(blocked(k, static_cast<std::int64_t>(k) * 30));
    }
    for (const auto& b : blocking_series(all_in, 300, 120)) {
        CHECK(b.rate == 0.0);
    }
    for (const auto& b : blocking_series(all_out, 300, 120)) {
        CHECK(b.rate == 1.0);
    }
    const std::vector<LedgerEntry> mix{admitted(0, 0, 5), blocked(1, 10), blocked(2, 119), admitted(3, 120, 5),
                                       blocked(4, 500)};
    const auto bins = blocking_series(mix, 240, 120);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].arrived == 3);
    CHECK(bins[0].rate == doctest::Approx(2.0 / 3.0));
    CHECK(bins[1].arrived == 1);
    CHECK(bins[1].rate == 0.0);
}

TEST_CASE("CDFs are non-decreasing and end at one") {
    std::vector<BlockingBin> bins{{0, 10, 1, 0.1}, {120, 30, 0, 0.0}, {240, 0, 0, 0.0}, {360, 10, 1, 0.1}};
    const auto cdf = blocking_cdf(bins);
    REQUIRE(cdf.size() == 2);
    CHECK(cdf[0].value == 0.0);
    CHECK(cdf[0].fraction == doctest::Approx(0.6));
    CHECK(cdf[1].fraction == 1.0);

    std::vector<LedgerEntry> ledger;
    for (std::uint64_t k = 0; k < 500; ++k) {
        ledger.push_back(admitted(k, 0, 1.0 + static_cast<double>(k % 37)));
    }
    ledger.push_back(blocked(500, 0));
    const auto s = service_time_cdf(ledger);
    REQUIRE_FALSE(s.empty());
    for (std::size_t k = 1; k < s.size(); ++k) {
        CHECK(s[k].value > s[k - 1].value);
        CHECK(s[k].fraction >= s[k - 1].fraction);
    }
    CHECK(s.back().fraction == 1.0);
    CHECK(s.front().value == doctest::Approx(1e-6));
}

TEST_CASE("soft-blocking heatmap") {
    std::vector<LedgerEntry> ledger;
    std::vector<VmSample> series;
    for (std::int64_t t = 0; t < 120; ++t) {
        series.push_back(VmSample{t, t < 60 ? 1 : 2, 1, 1});
    }
    // minute 0: 40 responses at K=1, 10 over the target; minute 1: 29 at K=2
    for (std::uint64_t k = 0; k < 40; ++k) {
        ledger.push_back(admitted(k, static_cast<std::int64_t>(k), k < 10 ? 6.0 : 5.0));
    }
    for (std::uint64_t k = 0; k < 29; ++k) {
        ledger.push_back(admitted(40 + k, 60 + static_cast<std::int64_t>(k), 5.0));
    }
    const auto map = soft_blocking_heatmap(ledger, series, 5e-6);
    REQUIRE(map.cells.size() == 2);
    CHECK(map.cells[0].vms == 1);
    CHECK(map.cells[0].load_bin == 4);
    CHECK(map.cells[0].frequency == doctest::Approx(0.25));
    CHECK(map.cells[0].severity == doctest::Approx(1e-6));
    CHECK_FALSE(map.cells[0].suppressed);
    CHECK(map.cells[1].vms == 2);
    CHECK(map.cells[1].frequency == 0.0);
    CHECK(map.cells[1].suppressed);
    CHECK_FALSE(exceeds_sla(5e-6 * (1 + 1e-12), 5e-6));
    CHECK(exceeds_sla(5.1e-6, 5e-6));
}

TEST_CASE("slot statistics") {
    const WorkloadProfile p({WorkloadSlot{100, 9, 2}, WorkloadSlot{100, 5, 4}, WorkloadSlot{100, 9, 1}});
    std::vector<VmSample> series;
    for (std::int64_t t = 0; t < 300; ++t) {
        series.push_back(VmSample{t, t < 100 ? 1 : 3, 1, 1});
    }
    const std::vector<LedgerEntry> ledger{admitted(0, 5, 1.0), blocked(1, 150), admitted(2, 160, 1.0)};
    const auto s = slot_stats(p, ledger, series);
    REQUIRE(s.size() == 3);
    CHECK(s[0].offered_rate == doctest::Approx(2.0 / 4.5));
    CHECK(s[1].offered_rate == doctest::Approx(1.6));
    CHECK(s[0].low_traffic);
    CHECK_FALSE(s[1].low_traffic);
    CHECK(s[2].low_traffic);
    CHECK(s[0].mean_vms == 1.0);
    CHECK(s[1].mean_vms == 3.0);
    CHECK(s[1].blocking == 0.5);
}

TEST_CASE("ledger and VM series CSV round-trip") {
    const std::vector<LedgerEntry> ledger{admitted(0, 1, 3.5, 700'000), blocked(1, 2),
                                          LedgerEntry{2, 3, 300'000, Outcome::Admitted, 4, 1.0 / 3.0}};
    const auto path = scratch("ledger.csv");
    write_ledger_csv(path, ledger);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "id,arrival_s,iterations,outcome,vm_id,service_time_s");
    const auto back = read_ledger_csv(path);
    REQUIRE(back.size() == 3);
    CHECK(back[1].outcome == Outcome::Blocked);
    CHECK(back[1].vm_id == -1);
    CHECK_FALSE(back[1].service_time_s.has_value());
    CHECK(*back[2].service_time_s == 1.0 / 3.0);
    CHECK(back[2].vm_id == 4);
    CHECK_NOTHROW(check_ledger_conservation(back));

    const std::vector<VmSample> series{{0, 1, 1, 1}, {1, 2, 1, 2}};
    const auto vpath = scratch("vm_series.csv");
    write_vm_series_csv(vpath, series);
    const auto vback = read_vm_series_csv(vpath);
    REQUIRE(vback.size() == 2);
    CHECK(vback[1].instantiated == 2);

    std::ofstream(scratch("bad.csv")) << "id,arrival_s,iterations,outcome,vm_id,service_time_s\n0,x,1,admitted,0,1\n";
    CHECK_THROWS_AS(read_ledger_csv(scratch("bad.csv")), DataFileError);
    CHECK_THROWS_AS(read_ledger_csv(scratch("missing.csv")), DataFileError);
}

TEST_CASE("ledger conservation check") {
    CHECK_THROWS_AS(check_ledger_conservation(std::vector<LedgerEntry>{admitted(1, 0, 1.0)}), InvariantViolation);
    CHECK_THROWS_AS(check_ledger_conservation(std::vector<LedgerEntry>{
                        LedgerEntry{0, 0, 300'000, Outcome::Admitted, 0, std::nullopt}}),
                    InvariantViolation);
    CHECK_THROWS_AS(
        check_ledger_conservation(std::vector<LedgerEntry>{LedgerEntry{0, 0, 300'000, Outcome::Blocked, 2, {}}}),
        InvariantViolation);
}

TEST_CASE("report bundle") {
    const WorkloadProfile p({WorkloadSlot{240, 5, 1}});
    std::vector<VmSample> series;
    for (std::int64_t t = 0; t < 240; ++t) {
        series.push_back(VmSample{t, 2, 2, 2});
    }
    const std::vector<LedgerEntry> ledger{admitted(0, 0, 6.0), blocked(1, 10), admitted(2, 200, 4.0)};
    const auto b = build_report("x", "static", p, ledger, series, 5e-6);
    CHECK(b.arrived == 3);
    CHECK(b.blocked == 1);
    CHECK(b.blocking == doctest::Approx(1.0 / 3.0));
    CHECK(b.vm_hours == doctest::Approx(2.0 * 240 / 3600));
    CHECK(b.mean_vms == 2.0);
    CHECK(b.soft_blocking == 0.5);
    CHECK(to_json(b) == to_json(build_report("x", "static", p, ledger, series, 5e-6)));
}

TEST_CASE("svg rendering") {
    LinePlot plot{"t<1>", "x", "y", {PlotSeries{"a", {0, 1, 2}, {1, 3, 2}, false}}, false};
    const auto svg = render_svg(plot);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("t&lt;1&gt;") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    Heatmap m;
    m.cells.push_back(HeatCell{1, 0, 40, 10, 0.25, 1e-6, false});
    m.cells.push_back(HeatCell{2, 1, 5, 0, 0.0, 0.0, true});
    const auto h = render_heatmap_svg(m, "heat");
    CHECK(h.find("url(#hatch)") != std::string::npos);
    CHECK(render_svg(LinePlot{}).find("</svg>") != std::string::npos);
}
