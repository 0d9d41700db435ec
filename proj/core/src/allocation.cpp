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

#include "d2d/allocation.hpp"

#include <algorithm>
#include <tuple>

#include "d2d/error.hpp"
#include "d2d/min_cost_flow.hpp"

namespace d2d {

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::Distributed: return "distributed";
    case Engine::Greedy: return "greedy";
    case Engine::Optimal: return "optimal";
  }
  return "unknown";
}

std::string to_string(Schedule schedule) {
  return schedule == Schedule::SynchronousRounds ? "sync" : "async";
}

Engine engine_from_string(const std::string& name) {
  if (name == "distributed") return Engine::Distributed;
  if (name == "greedy") return Engine::Greedy;
  if (name == "optimal") return Engine::Optimal;
  throw ConfigError("unknown engine '" + name + "' (expected distributed|greedy|optimal)");
}

Schedule schedule_from_string(const std::string& name) {
  if (name == "sync") return Schedule::SynchronousRounds;
  if (name == "async") return Schedule::SeededAsync;
  throw ConfigError("unknown schedule '" + name + "' (expected sync|async)");
}

int Allocation::units(int buyer_id, int seller_id) const {
  auto it = flows.find({buyer_id, seller_id});
  return it == flows.end() ? 0 : it->second;
}

long long Allocation::total_units() const {
  long long n = 0;
  for (const auto& [pair, f] : flows) n += f;
  return n;
}

std::vector<int> Allocation::buyer_totals(const MarketInstance& instance) const {
  std::vector<int> out(instance.buyers().size(), 0);
  for (const auto& [pair, f] : flows)
    if (auto i = instance.buyer_index(pair.first)) out[*i] += f;
  return out;
}

std::vector<int> Allocation::seller_totals(const MarketInstance& instance) const {
  std::vector<int> out(instance.sellers().size(), 0);
  for (const auto& [pair, f] : flows)
    if (auto j = instance.seller_index(pair.second)) out[*j] += f;
  return out;
}

Allocation allocate_centralized_greedy(const MarketInstance& instance, const DeclarationProfile& decl) {
  require_coverage(instance, decl);
  const auto& buyers = instance.buyers();
  const auto& sellers = instance.sellers();

  struct Ranked {
    int weight;
    int buyer_id;
    int seller_id;
    std::size_t buyer;
    std::size_t seller;
  };
  std::vector<Ranked> ranked;
  for (const auto& e : instance.edges()) {
    const int w = edge_weight(decl.buyers[e.buyer].unit_price, decl.sellers[e.seller].unit_price);
    if (w < 0) continue;
    ranked.push_back({w, buyers[e.buyer].id, sellers[e.seller].id, e.buyer, e.seller});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return std::tie(b.weight, a.buyer_id, a.seller_id) < std::tie(a.weight, b.buyer_id, b.seller_id);
  });

  std::vector<int> demand(buyers.size());
  std::vector<int> supply(sellers.size());
  for (std::size_t i = 0; i < buyers.size(); ++i) demand[i] = decl.buyers[i].quantity;
  for (std::size_t j = 0; j < sellers.size(); ++j) supply[j] = decl.sellers[j].quantity;

  Allocation alloc;
  alloc.engine = to_string(Engine::Greedy);
  for (const auto& r : ranked) {
    const int units = std::min(demand[r.buyer], supply[r.seller]);
    if (units <= 0) continue;
    alloc.flows[{r.buyer_id, r.seller_id}] += units;
    demand[r.buyer] -= units;
    supply[r.seller] -= units;
    ++alloc.iterations_used;
  }
  return alloc;
}

Allocation allocate_optimal(const MarketInstance& instance, const DeclarationProfile& decl) {
  require_coverage(instance, decl);
  const auto& buyers = instance.buyers();
  const auto& sellers = instance.sellers();
  const int m = static_cast<int>(buyers.size());
  const int n = static_cast<int>(sellers.size());
  const int source = 0;
  const int sink = m + n + 1;
  MinCostFlow mcf(m + n + 2);
  for (int i = 0; i < m; ++i) mcf.add_arc(source, 1 + i, decl.buyers[static_cast<std::size_t>(i)].quantity, 0);
  for (int j = 0; j < n; ++j) mcf.add_arc(1 + m + j, sink, decl.sellers[static_cast<std::size_t>(j)].quantity, 0);

  struct Link {
    int arc;
    std::size_t buyer;
    std::size_t seller;
  };
  std::vector<Link> links;
  for (const auto& e : instance.edges()) {
    const int w = edge_weight(decl.buyers[e.buyer].unit_price, decl.sellers[e.seller].unit_price);
    if (w < 0) continue;
    const int cap = std::min(decl.buyers[e.buyer].quantity, decl.sellers[e.seller].quantity);
    if (cap <= 0) continue;
    const int arc = mcf.add_arc(1 + static_cast<int>(e.buyer), 1 + m + static_cast<int>(e.seller), cap, -w);
    links.push_back({arc, e.buyer, e.seller});
  }
  const auto result = mcf.solve_min_cost(source, sink);

  Allocation alloc;
  alloc.engine = to_string(Engine::Optimal);
  alloc.iterations_used = result.augmentations;
  for (const auto& l : links) {
    const auto f = mcf.flow(l.arc);
    if (f > 0) alloc.flows[{buyers[l.buyer].id, sellers[l.seller].id}] = static_cast<int>(f);
  }
  return alloc;
}

Allocation allocate(const MarketInstance& instance, const DeclarationProfile& decl, const EngineSpec& spec) {
  switch (spec.engine) {
    case Engine::Distributed: return allocate_distributed(instance, decl, spec.schedule, spec.async_seed);
    case Engine::Greedy: return allocate_centralized_greedy(instance, decl);
    case Engine::Optimal: return allocate_optimal(instance, decl);
  }
  throw InputError("unknown engine");
}

std::vector<std::string> feasibility_violations(const MarketInstance& instance, const DeclarationProfile& decl,
                                                const Allocation& alloc) {
  std::vector<std::string> out;
  if (decl.buyers.size() != instance.buyers().size() || decl.sellers.size() != instance.sellers().size()) {
    out.emplace_back("declaration profile does not cover every participant");
    return out;
  }
  std::vector<long long> bought(instance.buyers().size(), 0);
  std::vector<long long> sold(instance.sellers().size(), 0);
  for (const auto& [pair, f] : alloc.flows) {
    const auto label = "(buyer " + std::to_string(pair.first) + ", seller " + std::to_string(pair.second) + ")";
    const auto i = instance.buyer_index(pair.first);
    const auto j = instance.seller_index(pair.second);
    if (!i || !j) {
      out.push_back("flow on " + label + " references an unknown participant");
      continue;
    }
    if (f <= 0) out.push_back("integrality: flow on " + label + " is not a positive integer");
    const auto nbrs = instance.sellers_of(*i);
    if (!std::binary_search(nbrs.begin(), nbrs.end(), *j)) out.push_back("assignment: " + label + " is not an edge");
    bought[*i] += f;
    sold[*j] += f;
  }
  for (std::size_t i = 0; i < bought.size(); ++i)
    if (bought[i] > decl.buyers[i].quantity)
      out.push_back("demand: buyer " + std::to_string(instance.buyers()[i].id) + " receives " +
                    std::to_string(bought[i]) + " > declared " + std::to_string(decl.buyers[i].quantity));
  for (std::size_t j = 0; j < sold.size(); ++j)
    if (sold[j] > decl.sellers[j].quantity)
      out.push_back("supply: seller " + std::to_string(instance.sellers()[j].id) + " sells " +
                    std::to_string(sold[j]) + " > declared " + std::to_string(decl.sellers[j].quantity));
  return out;
}

long long social_welfare(const MarketInstance& instance, const DeclarationProfile& decl, const Allocation& alloc) {
  const auto violations = feasibility_violations(instance, decl, alloc);
  if (!violations.empty()) throw FeasibilityError("infeasible allocation: " + violations.front());
  long long welfare = 0;
  for (const auto& [pair, f] : alloc.flows) {
    const auto i = *instance.buyer_index(pair.first);
    const auto j = *instance.seller_index(pair.second);
    welfare += static_cast<long long>(edge_weight(decl.buyers[i].unit_price, decl.sellers[j].unit_price)) * f;
  }
  return welfare;
}

}  // namespace d2d
