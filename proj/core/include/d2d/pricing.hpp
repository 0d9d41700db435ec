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

#include <map>
#include <utility>
#include <vector>

#include "d2d/allocation.hpp"
#include "d2d/market.hpp"

namespace d2d {

/// Midpoint of declared value and declared cost.
double basic_price(int declared_value, int declared_cost);

struct FinalPrices {
  double buyer = 0.0;   // p^B: basic price minus the buyer's per-unit subsidy
  double seller = 0.0;  // p^S: basic price plus the seller's per-unit subsidy
};

/// Throws InputError when either correction is negative.
FinalPrices final_prices(int declared_value, int declared_cost, double buyer_correction, double seller_correction);

/// v * min(alpha, sum f) - sum f * p^B. Keys of `flows` and `prices` are
/// seller ids.
double buyer_utility(int demand, int value, const std::map<int, int>& flows, const std::map<int, double>& prices);

/// sum f * (p^S - c). Keys are buyer ids.
double seller_utility(int cost, const std::map<int, int>& flows, const std::map<int, double>& prices);

/// One calibrated cell: total expected payment (g-bar / h-bar), the expected
/// traded quantity it was calibrated against, and the per-unit subsidy
/// derived from the two.
struct CorrectionEntry {
  double total = 0.0;
  double expected_quantity = 0.0;
  double per_unit = 0.0;

  friend bool operator==(const CorrectionEntry&, const CorrectionEntry&) = default;
};

/// Correction payments keyed by declared (quantity, unit price).
class CorrectionTable {
 public:
  using Key = std::pair<int, int>;  // (declared quantity, declared unit price)

  /// All-zero table covering quantities x values for buyers and
  /// quantities x costs for sellers.
  static CorrectionTable zeros(const std::vector<int>& quantities, PriceRange values, PriceRange costs);

  /// per_unit = total / expected_quantity, or 0 when nothing is expected to
  /// trade at that type.
  void set_buyer(int quantity, int value, double total, double expected_quantity);
  void set_seller(int quantity, int cost, double total, double expected_quantity);

  /// Throws CalibrationError when the declared type is not in the table.
  const CorrectionEntry& buyer(int quantity, int value) const;
  const CorrectionEntry& seller(int quantity, int cost) const;

  bool has_buyer(int quantity, int value) const { return buyers_.contains({quantity, value}); }
  bool has_seller(int quantity, int cost) const { return sellers_.contains({quantity, cost}); }

  const std::map<Key, CorrectionEntry>& buyer_entries() const { return buyers_; }
  const std::map<Key, CorrectionEntry>& seller_entries() const { return sellers_; }

  bool all_zero() const;

  friend bool operator==(const CorrectionTable&, const CorrectionTable&) = default;

 private:
  std::map<Key, CorrectionEntry> buyers_;
  std::map<Key, CorrectionEntry> sellers_;
};

struct PricedTrade {
  int buyer_id = 0;
  int seller_id = 0;
  int units = 0;
  double buy_price = 0.0;
  double sell_price = 0.0;
  double buyer_correction = 0.0;   // g
  double seller_correction = 0.0;  // h
};

struct PricedRound {
  std::vector<PricedTrade> trades;
  /// Platform subsidy for the round: sum of units * (g + h).
  double budget_gap = 0.0;
};

/// Prices every positive-flow pair from the two endpoints' own
/// declarations and table rows. Throws CalibrationError when a trading
/// participant's declared type has no table entry, FeasibilityError for an
/// infeasible allocation.
PricedRound price_round(const MarketInstance& instance, const DeclarationProfile& decl, const Allocation& alloc,
                        const CorrectionTable& table);

/// Per-user subscription fee that recovers the expected subsidy over a
/// billing period: mean budget gap per round * rounds per period / mean
/// participant count. Zero participants yields zero.
double subscription_fee(double mean_budget_gap, double rounds_per_period, double mean_participants);

}  // namespace d2d
