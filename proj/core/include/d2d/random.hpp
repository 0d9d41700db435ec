// Copyright 2026 The d2d-auction Authors
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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace d2d {

/// Seedable 64-bit generator with hand-written distributions.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions below are spelled out instead of using
/// <random>'s, whose algorithms are implementation-defined, so a (seed,
/// config) pair reproduces the same market on every toolchain.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer on the closed range [lo, hi]; rejection keeps it unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Poisson by inversion with sequential search. Means above
  /// kPoissonChunk are split into a sum of independent Poisson draws so the
  /// starting mass exp(-mean) never underflows.
  std::int64_t poisson(double mean);

  static constexpr double kPoissonChunk = 256.0;

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent per-stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for sub-stream `index` of family `stream` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

}  // namespace d2d
