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

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "sqlr/rl_core.hpp"

using namespace sqlr;

namespace {

double total(const std::vector<double>& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

}  // namespace

TEST_CASE("epsilon schedule") {
    const ExplorationParams p{100, 0.01};
    CHECK(epsilon(0, p) == 1.0);
    CHECK(epsilon(50, p) == 0.5);
    CHECK(epsilon(99, p) == doctest::Approx(0.01));
    CHECK(epsilon(100, p) == 0.01);
    CHECK(epsilon(100000, p) == 0.01);
    CHECK(epsilon(10, ExplorationParams{10, 0.2}) == 0.2);
    CHECK(epsilon(9, ExplorationParams{10, 0.2}) == 0.2);
    CHECK_THROWS(ExplorationParams{0, 0.01}.validate());
    CHECK_THROWS(ExplorationParams{10, 1.0}.validate());
}

TEST_CASE("discounted target") {
    CHECK(discounted_target(1.0, 0.0, 7.0) == 1.0);
    CHECK(discounted_target(1.0, 0.9, 2.0) == doctest::Approx(2.8));
    CHECK(discounted_target(-0.12, 0.9, 0.0) == -0.12);
}

TEST_CASE("running-mean update") {
    CHECK(mean_update(0.0, 1, 5.0) == 5.0);
    CHECK(mean_update(5.0, 2, 5.0) == 2.5);
    CHECK_THROWS(mean_update(0.0, 0, 1.0));
}

TEST_CASE("update fixed point is half the target") {
    double q = 0.0;
    for (std::uint64_t n = 1; n <= 10000; ++n) {
        const double next = mean_update(q, n, 5.0);
        const double nn = static_cast<double>(n);
        const double delta = 5.0 - q;
        // new-sample increment over the (n-1)/n carried mean, and the total step
        CHECK(std::abs(next - (nn - 1.0) / nn * q) <= std::abs(delta) / nn + 1e-12);
        CHECK(std::abs(next - q) <= (std::abs(delta) + std::abs(q)) / nn + 1e-12);
        q = next;
    }
    CHECK(q == doctest::Approx(2.5).epsilon(0.004));
}

TEST_CASE("selection distribution") {
    const std::array<double, 3> zeros{0.0, 0.0, 0.0};
    const std::array<std::uint64_t, 3> n0{0, 0, 0};
    for (const double p : selection_distribution(zeros, n0, 5)) {
        CHECK(p == doctest::Approx(1.0 / 3.0));
    }
    for (const double p : selection_distribution(std::array<double, 2>{4.0, -2.0}, std::array<std::uint64_t, 2>{0, 0}, 0)) {
        CHECK(p == 0.5);
    }

    const auto a = selection_distribution(std::array<double, 2>{1.0, -1.0}, std::array<std::uint64_t, 2>{1, 1}, 2);
    CHECK(a[0] == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(a[1] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(std::abs(total(a) - 1.0) < 1e-9);

    const auto b = selection_distribution(std::array<double, 2>{1.0, 1.0}, std::array<std::uint64_t, 2>{3, 1}, 4);
    const double w0 = 1.0 - std::tanh(0.75);
    const double w1 = 1.0 - std::tanh(0.25);
    CHECK(b[0] == doctest::Approx(w0 / (w0 + w1)).epsilon(1e-9));
    CHECK(std::abs(b[0] - 0.3258) < 1e-4);
    CHECK(std::abs(b[1] - 0.6742) < 1e-4);
    CHECK(std::abs(total(b) - 1.0) < 1e-9);

    CHECK_THROWS(selection_distribution(std::array<double, 2>{1.0, 1.0}, std::array<std::uint64_t, 1>{1}, 1));
}

TEST_CASE("selection distribution sums to one on random inputs") {
    RandomStream rng(3);
    for (int k = 0; k < 10000; ++k) {
        const auto count = static_cast<std::size_t>(rng.uniform_int(1, 5));
        std::vector<double> q(count);
        std::vector<std::uint64_t> n(count);
        std::uint64_t i = 0;
        for (std::size_t a = 0; a < count; ++a) {
            q[a] = rng.uniform01() * 4.0 - 2.0;
            n[a] = static_cast<std::uint64_t>(rng.uniform_int(0, 50));
            i += n[a];
        }
        const auto p = selection_distribution(q, n, i);
        CHECK(std::abs(total(p) - 1.0) < 1e-9);
        for (const double v : p) {
            CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("greedy ties go to the lowest key") {
    QTable<int> t;
    const std::array<int, 3> acts{-1, 0, 1};
    CHECK(greedy_action(t, 0, acts) == -1);
    t.set_value(0, 1, 2.0);
    t.set_value(0, 0, 2.0);
    CHECK(greedy_action(t, 0, acts) == 0);
    CHECK_THROWS(greedy_action(t, 0, std::span<const int>{}));
}

TEST_CASE("choose_action: converged state returns argmax with 1 - eps_min") {
    QTable<int> t;
    const std::array<int, 2> acts{0, 1};
    for (int k = 0; k < 200; ++k) {
        t.update(7, 0, 0.1);
        t.update(7, 1, 1.0);
    }
    const ExplorationParams p{100, 0.01};
    const auto exact = policy_probabilities(t, 7, acts, p);
    RandomStream rng(11);
    constexpr int kDraws = 100000;
    int greedy = 0;
    for (int k = 0; k < kDraws; ++k) {
        greedy += choose_action(t, 7, acts, p, rng) == 1 ? 1 : 0;
    }
    const double expected = exact[1];
    CHECK(expected >= 0.99);
    const double sigma = std::sqrt(expected * (1.0 - expected) / kDraws);
    CHECK(std::abs(static_cast<double>(greedy) / kDraws - expected) < 3.0 * sigma + 1e-12);
}

TEST_CASE("choose_action: unvisited state samples uniformly") {
    QTable<int> t;
    const std::array<int, 3> acts{-1, 0, 1};
    RandomStream rng(5);
    constexpr int kDraws = 90000;
    std::array<int, 3> hits{};
    for (int k = 0; k < kDraws; ++k) {
        ++hits[static_cast<std::size_t>(choose_action(t, 0, acts, ExplorationParams{}, rng) + 1)];
    }
    const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / kDraws);
    for (const int h : hits) {
        CHECK(std::abs(static_cast<double>(h) / kDraws - 1.0 / 3.0) < 3.0 * sigma);
    }
}

TEST_CASE("choose_action: single and empty action sets, determinism") {
    QTable<int> t;
    RandomStream rng(1);
    CHECK(choose_action(t, 0, std::array<int, 1>{4}, ExplorationParams{}, rng) == 4);
    CHECK_THROWS(choose_action(t, 0, std::span<const int>{}, ExplorationParams{}, rng));

    const std::array<int, 5> acts{-2, -1, 0, 1, 2};
    RandomStream a(99);
    RandomStream b(99);
    for (int k = 0; k < 1000; ++k) {
        REQUIRE(choose_action(t, k % 3, acts, ExplorationParams{}, a) ==
                choose_action(t, k % 3, acts, ExplorationParams{}, b));
    }
}

TEST_CASE("table bookkeeping and convergence fraction") {
    QTable<int> t;
    t.set_value(1, 0, 3.0);
    CHECK(t.state_visits(1) == 0);
    CHECK(t.visited_states() == 0);
    CHECK(t.update(2, 0, 4.0) == 4.0);
    CHECK(t.update(2, 0, 4.0) == 2.0);
    CHECK(t.pair_visits(2, 0) == 2);
    CHECK(t.state_visits(2) == 2);
    CHECK(t.visited_states() == 1);
    CHECK(t.convergence_fraction(ExplorationParams{2, 0.01}) == 1.0);
    CHECK(t.convergence_fraction(ExplorationParams{3, 0.01}) == 0.0);
    CHECK(t.max_value(1, std::array<int, 2>{0, 1}) == 3.0);
}

TEST_CASE("table persistence round-trips and checks its header") {
    QTable<int> t;
    t.update(1, 0, 0.5);
    t.update(1, 1, -0.25);
    t.set_value(3, 0, 1.5);
    const auto doc = qtable_to_json(t, "test_key");
    const auto back = qtable_from_json<int>(doc, "test_key");
    CHECK(qtable_to_json(back, "test_key") == doc);
    CHECK(back.value(3, 0) == 1.5);
    CHECK(back.state_visits(1) == 2);
    CHECK_THROWS_AS(qtable_from_json<int>(doc, "other_key"), QTableFormatError);
    auto bad = doc;
    bad["version"] = 99;
    CHECK_THROWS_AS(qtable_from_json<int>(bad, "test_key"), QTableFormatError);
}
