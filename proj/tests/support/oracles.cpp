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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "d2d/allocation.hpp"
#include "d2d/pricing.hpp"

namespace d2d::testing {

long long brute_force_welfare(const MarketInstance& instance, const DeclarationProfile& decl) {
  const std::size_t m = instance.buyers().size();
  std::map<std::pair<std::size_t, std::vector<int>>, long long> memo;

  std::function<long long(std::size_t, std::vector<int>&)> solve = [&](std::size_t i,
                                                                       std::vector<int>& supply) -> long long {
    if (i == m) return 0;
    auto key = std::make_pair(i, supply);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto nbrs = instance.sellers_of(i);
    long long best = std::numeric_limits<long long>::min();
    // Distribute up to the buyer's demand over its neighbours, one seller
    // at a time.
    std::function<void(std::size_t, int, long long)> spread = [&](std::size_t k, int left, long long gained) {
      if (k == nbrs.size()) {
        best = std::max(best, gained + solve(i + 1, supply));
        return;
      }
      const std::size_t j = nbrs[k];
      const int w = decl.buyers[i].unit_price - decl.sellers[j].unit_price;
      const int cap = std::min(left, supply[j]);
      for (int f = 0; f <= cap; ++f) {
        supply[j] -= f;
        spread(k + 1, left - f, gained + static_cast<long long>(w) * f);
        supply[j] += f;
      }
    };
    spread(0, std::max(0, decl.buyers[i].quantity), 0);
    memo.emplace(std::move(key), best);
    return best;
  };

  std::vector<int> supply;
  for (const auto& d : decl.sellers) supply.push_back(std::max(0, d.quantity));
  return solve(0, supply);
}

namespace {

MarketInstance build(Rng& rng, const MicroLimits& lim, bool distinct) {
  const int nb = static_cast<int>(rng.uniform_int(1, lim.max_buyers));
  const int ns = static_cast<int>(rng.uniform_int(1, lim.max_sellers));
  std::vector<Participant> buyers;
  std::vector<Participant> sellers;
  std::vector<int> cost_pool;
  for (int c = 0; c < 100; ++c) cost_pool.push_back(c);
  for (int k = 99; k > 0; --k) std::swap(cost_pool[static_cast<std::size_t>(k)], cost_pool[static_cast<std::size_t>(rng.uniform_int(0, k))]);
  for (int i = 0; i < nb; ++i) {
    const int q = static_cast<int>(rng.uniform_int(1, lim.max_quantity));
    const int v = distinct ? 100 * (i + 1) : static_cast<int>(rng.uniform_int(lim.values.lo, lim.values.hi));
    buyers.push_back({i + 1, {Role::Buyer, q, v}, {}});
  }
  for (int j = 0; j < ns; ++j) {
    const int q = static_cast<int>(rng.uniform_int(1, lim.max_quantity));
    const int c = distinct ? cost_pool[static_cast<std::size_t>(j)] : static_cast<int>(rng.uniform_int(lim.costs.lo, lim.costs.hi));
    sellers.push_back({j + 1, {Role::Seller, q, c}, {}});
  }
  const double density = rng.uniform(0.2, 1.0);
  std::vector<EdgeRef> edges;
  for (std::size_t i = 0; i < buyers.size(); ++i)
    for (std::size_t j = 0; j < sellers.size(); ++j)
      if (rng.bernoulli(density)) edges.push_back({i, j});
  return MarketInstance::from_edges(std::move(buyers), std::move(sellers), edges);
}

// Calls visit(instance, weight) for every micro outcome where the tagged
// user sits at index 0 of its role with the given true type.
void visit_outcomes(const Environment& env, Role role, UserType tagged,
                    const std::function<void(const MarketInstance&, double)>& visit) {
  const auto& m = env.market;
  const int nb = env.micro.buyers;
  const int ns = env.micro.sellers;
  std::vector<UserType> types(static_cast<std::size_t>(nb + ns));
  const double pq = 1.0 / static_cast<double>(m.quantities.size());
  const double pv = 1.0 / m.values.size();
  const double pc = 1.0 / m.costs.size();

  std::function<void(int, double)> assign = [&](int slot, double weight) {
    if (slot == nb + ns) {
      // All edge subsets, recursively.
      std::vector<EdgeRef> edges;
      std::function<void(int, double)> link = [&](int k, double w) {
        if (k == nb * ns) {
          std::vector<Participant> buyers;
          std::vector<Participant> sellers;
          for (int i = 0; i < nb; ++i) buyers.push_back({i + 1, types[static_cast<std::size_t>(i)], {}});
          for (int j = 0; j < ns; ++j) sellers.push_back({j + 1, types[static_cast<std::size_t>(nb + j)], {}});
          visit(MarketInstance::from_edges(buyers, sellers, edges), w);
          return;
        }
        const double q = env.micro.edge_probability;
        if (q < 1.0) link(k + 1, w * (1.0 - q));
        if (q > 0.0) {
          edges.push_back({static_cast<std::size_t>(k / ns), static_cast<std::size_t>(k % ns)});
          link(k + 1, w * q);
          edges.pop_back();
        }
      };
      link(0, weight);
      return;
    }
    const bool is_buyer = slot < nb;
    const bool is_tagged = (role == Role::Buyer && slot == 0) || (role == Role::Seller && slot == nb);
    if (is_tagged) {
      types[static_cast<std::size_t>(slot)] = tagged;
      assign(slot + 1, weight);
      return;
    }
    const PriceRange prices = is_buyer ? m.values : m.costs;
    for (int q : m.quantities)
      for (int p = prices.lo; p <= prices.hi; ++p) {
        types[static_cast<std::size_t>(slot)] = {is_buyer ? Role::Buyer : Role::Seller, q, p};
        assign(slot + 1, weight * pq * (is_buyer ? pv : pc));
      }
  };
  assign(0, 1.0);
}

}  // namespace

MarketInstance random_micro_instance(Rng& rng, const MicroLimits& limits) { return build(rng, limits, false); }

MarketInstance random_distinct_weight_instance(Rng& rng, const MicroLimits& limits) {
  return build(rng, limits, true);
}

double steady_state_fixed_point(double lambda, double mu, double p, int T) {
  double inflow = 0.0;
  for (int t = 0; t < T; ++t) inflow += lambda * std::exp(-mu * (T - t));
  const double carry = p * std::exp(-mu * T);
  double k = 0.0;
  for (int it = 0; it < 100000000; ++it) {
    const double next = k * carry + inflow;
    if (std::abs(next - k) <= 1e-15 * std::max(1.0, std::abs(next))) return next;
    k = next;
  }
  return k;
}

TaggedExpectation enumerate_buyer(const Environment& env, int demand, int value, int declared_demand,
                                  int declared_value) {
  TaggedExpectation out;
  visit_outcomes(env, Role::Buyer, {Role::Buyer, declared_demand, declared_value},
                 [&](const MarketInstance& inst, double w) {
                   const auto decl = DeclarationProfile::truthful(inst);
                   const auto alloc = allocate(inst, decl, env.engine);
                   std::map<int, int> flows;
                   std::map<int, double> prices;
                   for (const auto& [pair, f] : alloc.flows) {
                     if (pair.first != 1 || f == 0) continue;
                     flows[pair.second] = f;
                     prices[pair.second] =
                         (declared_value + inst.sellers()[static_cast<std::size_t>(pair.second - 1)].type.unit_price) /
                         2.0;
                   }
                   int got = 0;
                   for (const auto& [s, f] : flows) got += f;
                   out.utility += w * buyer_utility(demand, value, flows, prices);
                   out.quantity += w * got;
                 });
  return out;
}

TaggedExpectation enumerate_seller(const Environment& env, int supply, int cost, int declared_supply,
                                   int declared_cost) {
  (void)supply;
  TaggedExpectation out;
  visit_outcomes(env, Role::Seller, {Role::Seller, declared_supply, declared_cost},
                 [&](const MarketInstance& inst, double w) {
                   const auto decl = DeclarationProfile::truthful(inst);
                   const auto alloc = allocate(inst, decl, env.engine);
                   std::map<int, int> flows;
                   std::map<int, double> prices;
                   for (const auto& [pair, f] : alloc.flows) {
                     if (pair.second != 1 || f == 0) continue;
                     flows[pair.first] = f;
                     prices[pair.first] =
                         (inst.buyers()[static_cast<std::size_t>(pair.first - 1)].type.unit_price + declared_cost) /
                         2.0;
                   }
                   int sold = 0;
                   for (const auto& [b, f] : flows) sold += f;
                   out.utility += w * seller_utility(cost, flows, prices);
                   out.quantity += w * sold;
                 });
  return out;
}

}  // namespace d2d::testing
