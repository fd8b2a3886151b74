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

#ifndef SQLR_RANDOM_HPP
#define SQLR_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace sqlr {

/// Deterministic random stream. Sub-streams are derived from one master seed
/// and a name, so components can be re-seeded independently.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Stream for component `name` under master `seed`.
    static RandomStream derive(std::uint64_t seed, std::string_view name);

    double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    /// Integer in [lo, hi], both inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace sqlr

#endif  // SQLR_RANDOM_HPP
