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
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "d2d/market.hpp"

namespace d2d {

enum class Engine { Distributed, Greedy, Optimal };
enum class Schedule { SynchronousRounds, SeededAsync };

std::string to_string(Engine engine);
std::string to_string(Schedule schedule);
Engine engine_from_string(const std::string& name);
Schedule schedule_from_string(const std::string& name);

/// Engine selection; `async_seed` only matters for Distributed + SeededAsync.
struct EngineSpec {
  Engine engine = Engine::Distributed;
  Schedule schedule = Schedule::SynchronousRounds;
  std::uint64_t async_seed = 0;

  friend bool operator==(const EngineSpec&, const EngineSpec&) = default;
};

/// (buyer_id, seller_id)
using PairId = std::pair<int, int>;

/// Integer flow on instance edges. Only positive flows are stored.
struct Allocation {
  std::map<PairId, int> flows;
  int iterations_used = 0;
  std::string engine;

  int units(int buyer_id, int seller_id) const;
  long long total_units() const;
  /// Units assigned to each buyer / seller, aligned with the instance.
  std::vector<int> buyer_totals(const MarketInstance& instance) const;
  std::vector<int> seller_totals(const MarketInstance& instance) const;
};

/// Distributed greedy: buyers and sellers run as message-passing agents. Each
/// iteration every unsatisfied agent sends greedy requests to its best
/// neighbours, mutual requests are granted at the smaller size, and
/// saturated agents leave their neighbours' tables.
///
/// Edges with w < 0 are never used. Neighbours are ranked by
/// (weight desc, peer id asc), which matches the centralized greedy's global
/// (weight desc, buyer id asc, seller id asc) order. Under
/// SynchronousRounds the result equals allocate_centralized_greedy; under
/// SeededAsync agents are activated one at a time in seeded random order and
/// only feasibility and the 1/2 bound are promised.
///
/// `observe(iteration, units_so_far)` runs after every global iteration
/// (a sweep, for SeededAsync) that allocated something.
using IterationObserver = std::function<void(int iteration, long long units_so_far)>;

Allocation allocate_distributed(const MarketInstance& instance, const DeclarationProfile& decl,
                                Schedule schedule = Schedule::SynchronousRounds,
                                std::uint64_t async_seed = 0, const IterationObserver& observe = {});

/// Centralized greedy: scan edges by (weight desc, buyer id asc, seller id
/// asc) and assign min(remaining demand, remaining supply) to each.
Allocation allocate_centralized_greedy(const MarketInstance& instance, const DeclarationProfile& decl);

/// Exact welfare maximiser via successive shortest paths on the
/// source -> buyers -> sellers -> sink network. Integral by construction.
Allocation allocate_optimal(const MarketInstance& instance, const DeclarationProfile& decl);

Allocation allocate(const MarketInstance& instance, const DeclarationProfile& decl, const EngineSpec& spec);

/// Violated constraints (demand, supply, non-edge, non-positive flow,
/// unknown id). Empty for a feasible allocation.
std::vector<std::string> feasibility_violations(const MarketInstance& instance, const DeclarationProfile& decl,
                                                const Allocation& alloc);

/// Sum of (v_hat - c_hat) * f over the allocation. Throws FeasibilityError
/// naming the first violated constraint when the allocation is infeasible.
long long social_welfare(const MarketInstance& instance, const DeclarationProfile& decl, const Allocation& alloc);

}  // namespace d2d
