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

#include <cstdint>

#include <benchmark/benchmark.h>

#include "d2d/allocation.hpp"
#include "d2d/dynamics.hpp"
#include "d2d/market.hpp"

namespace {

// Range arg is the communication range in metres at rho = 500, R = 1 km, so
// the edge count grows roughly with its square.
d2d::MarketInstance spatial(double comm_range) {
  d2d::MarketConfig c;
  c.mean_user_count = 500;
  c.comm_range = comm_range;
  return d2d::generate_market(c, 17);
}

template <d2d::Engine E, d2d::Schedule S = d2d::Schedule::SynchronousRounds>
void BM_Allocate(benchmark::State& state) {
  const auto inst = spatial(static_cast<double>(state.range(0)));
  const auto decl = d2d::DeclarationProfile::truthful(inst);
  const d2d::EngineSpec spec{E, S, 7};
  for (auto _ : state) benchmark::DoNotOptimize(d2d::allocate(inst, decl, spec));
  state.SetComplexityN(static_cast<std::int64_t>(inst.edge_count()));
  state.counters["edges"] = static_cast<double>(inst.edge_count());
}

BENCHMARK(BM_Allocate<d2d::Engine::Distributed>)->RangeMultiplier(2)->Range(25, 400)->Complexity();
BENCHMARK(BM_Allocate<d2d::Engine::Distributed, d2d::Schedule::SeededAsync>)
    ->RangeMultiplier(2)
    ->Range(25, 400)
    ->Complexity();
BENCHMARK(BM_Allocate<d2d::Engine::Greedy>)->RangeMultiplier(2)->Range(25, 400)->Complexity();
BENCHMARK(BM_Allocate<d2d::Engine::Optimal>)->RangeMultiplier(2)->Range(25, 200)->Complexity();

void BM_GenerateMarket(benchmark::State& state) {
  d2d::MarketConfig c;
  c.mean_user_count = static_cast<double>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(d2d::generate_market(c, ++seed));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GenerateMarket)->RangeMultiplier(2)->Range(250, 4000)->Complexity();

void BM_RoundSimulator(benchmark::State& state) {
  d2d::MarketConfig c;
  c.mean_user_count = static_cast<double>(state.range(0));
  for (auto _ : state) {
    d2d::RoundSimulator sim(c, {}, {d2d::Engine::Greedy}, 3);
    for (int r = 0; r < 5; ++r) {
      benchmark::DoNotOptimize(sim.play());
      sim.advance();
    }
  }
}
BENCHMARK(BM_RoundSimulator)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
