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

#include "d2d/random.hpp"

#include <cmath>
#include <limits>

#include "d2d/error.hpp"

namespace d2d {

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InputError("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return lo + static_cast<std::int64_t>(x % span);
}

namespace {

std::int64_t poisson_inversion(Rng& rng, double mean) {
  double mass = std::exp(-mean);
  double cumulative = mass;
  const double u = rng.uniform01();
  std::int64_t k = 0;
  while (u >= cumulative) {
    ++k;
    mass *= mean / static_cast<double>(k);
    const double next = cumulative + mass;
    // Tail mass below double resolution: stop rather than spin.
    if (next == cumulative) break;
    cumulative = next;
  }
  return k;
}

}  // namespace

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InputError("poisson: mean must be finite and >= 0");
  std::int64_t total = 0;
  while (mean > kPoissonChunk) {
    total += poisson_inversion(*this, kPoissonChunk);
    mean -= kPoissonChunk;
  }
  if (mean > 0.0) total += poisson_inversion(*this, mean);
  return total;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

}  // namespace d2d
