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

#include "d2d/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "d2d/error.hpp"

namespace d2d {

double basic_price(int declared_value, int declared_cost) {
  return (static_cast<double>(declared_value) + static_cast<double>(declared_cost)) / 2.0;
}

FinalPrices final_prices(int declared_value, int declared_cost, double buyer_correction, double seller_correction) {
  if (!(buyer_correction >= 0.0) || !(seller_correction >= 0.0))
    throw InputError("correction payments must be non-negative");
  const double base = basic_price(declared_value, declared_cost);
  return {base - buyer_correction, base + seller_correction};
}

double buyer_utility(int demand, int value, const std::map<int, int>& flows, const std::map<int, double>& prices) {
  long long received = 0;
  double paid = 0.0;
  for (const auto& [seller, f] : flows) {
    auto it = prices.find(seller);
    if (it == prices.end()) throw InputError("buyer_utility: no price for seller " + std::to_string(seller));
    received += f;
    paid += f * it->second;
  }
  return static_cast<double>(value) * static_cast<double>(std::min<long long>(demand, received)) - paid;
}

double seller_utility(int cost, const std::map<int, int>& flows, const std::map<int, double>& prices) {
  double total = 0.0;
  for (const auto& [buyer, f] : flows) {
    auto it = prices.find(buyer);
    if (it == prices.end()) throw InputError("seller_utility: no price for buyer " + std::to_string(buyer));
    total += f * (it->second - cost);
  }
  return total;
}

namespace {

CorrectionEntry make_entry(double total, double expected_quantity) {
  if (!(total >= 0.0)) throw CalibrationError("correction payment must be non-negative");
  if (!(expected_quantity >= 0.0)) throw CalibrationError("expected quantity must be non-negative");
  return {total, expected_quantity, expected_quantity > 0.0 ? total / expected_quantity : 0.0};
}

}  // namespace

CorrectionTable CorrectionTable::zeros(const std::vector<int>& quantities, PriceRange values, PriceRange costs) {
  CorrectionTable t;
  for (int q : quantities) {
    for (int v = values.lo; v <= values.hi; ++v) t.buyers_[{q, v}] = {};
    for (int c = costs.lo; c <= costs.hi; ++c) t.sellers_[{q, c}] = {};
  }
  return t;
}

void CorrectionTable::set_buyer(int quantity, int value, double total, double expected_quantity) {
  buyers_[{quantity, value}] = make_entry(total, expected_quantity);
}

void CorrectionTable::set_seller(int quantity, int cost, double total, double expected_quantity) {
  sellers_[{quantity, cost}] = make_entry(total, expected_quantity);
}

const CorrectionEntry& CorrectionTable::buyer(int quantity, int value) const {
  auto it = buyers_.find({quantity, value});
  if (it == buyers_.end())
    throw CalibrationError("correction table has no buyer entry for (quantity " + std::to_string(quantity) +
                           ", value " + std::to_string(value) + ")");
  return it->second;
}

const CorrectionEntry& CorrectionTable::seller(int quantity, int cost) const {
  auto it = sellers_.find({quantity, cost});
  if (it == sellers_.end())
    throw CalibrationError("correction table has no seller entry for (quantity " + std::to_string(quantity) +
                           ", cost " + std::to_string(cost) + ")");
  return it->second;
}

bool CorrectionTable::all_zero() const {
  auto zero = [](const auto& kv) { return kv.second.total == 0.0; };
  return std::all_of(buyers_.begin(), buyers_.end(), zero) && std::all_of(sellers_.begin(), sellers_.end(), zero);
}

PricedRound price_round(const MarketInstance& instance, const DeclarationProfile& decl, const Allocation& alloc,
                        const CorrectionTable& table) {
  const auto violations = feasibility_violations(instance, decl, alloc);
  if (!violations.empty()) throw FeasibilityError("infeasible allocation: " + violations.front());
  PricedRound round;
  round.trades.reserve(alloc.flows.size());
  for (const auto& [pair, f] : alloc.flows) {
    if (f <= 0) continue;
    const auto& b = decl.buyers[*instance.buyer_index(pair.first)];
    const auto& s = decl.sellers[*instance.seller_index(pair.second)];
    const double g = table.buyer(b.quantity, b.unit_price).per_unit;
    const double h = table.seller(s.quantity, s.unit_price).per_unit;
    const auto prices = final_prices(b.unit_price, s.unit_price, g, h);
    round.trades.push_back({pair.first, pair.second, f, prices.buyer, prices.seller, g, h});
    round.budget_gap += f * (g + h);
  }
  return round;
}

double subscription_fee(double mean_budget_gap, double rounds_per_period, double mean_participants) {
  if (mean_budget_gap < 0.0 || rounds_per_period < 0.0 || mean_participants < 0.0)
    throw InputError("subscription_fee: arguments must be non-negative");
  if (mean_participants == 0.0) return 0.0;
  return mean_budget_gap * rounds_per_period / mean_participants;
}

}  // namespace d2d
