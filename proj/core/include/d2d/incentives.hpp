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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "d2d/allocation.hpp"
#include "d2d/market.hpp"
#include "d2d/pricing.hpp"

namespace d2d {

/// Where the tagged user's counterparties come from.
///  - Spatial: generate_market() over the MarketConfig.
///  - Micro:   fixed buyer/seller counts, each pair linked independently with
///             edge_probability, types uniform on the grids. Small enough to
///             enumerate exactly.
///  - Fixed:   one pinned instance (degenerate distribution).
enum class Population { Spatial, Micro, Fixed };

std::string to_string(Population population);
Population population_from_string(const std::string& name);

struct MicroSpec {
  int buyers = 2;
  int sellers = 2;
  double edge_probability = 0.5;

  friend bool operator==(const MicroSpec&, const MicroSpec&) = default;
};

/// Everything a calibration is conditioned on. The type grids (quantities,
/// values, costs) always come from `market`.
struct Environment {
  MarketConfig market;
  Population population = Population::Spatial;
  MicroSpec micro;
  std::optional<MarketInstance> fixed_instance;
  EngineSpec engine{Engine::Greedy};

  void validate() const;
};

enum class Estimator { MonteCarlo, ExactEnumeration };

std::string to_string(Estimator estimator);
Estimator estimator_from_string(const std::string& name);

/// Expected utilities under basic prices, U^B(alpha, v, alpha_hat, v_hat)
/// and U^S(beta, c, beta_hat, c_hat), and expected traded quantities
/// Q^B(alpha_hat, v_hat), Q^S(beta_hat, c_hat), over the full type grid.
/// Seller entries exist only for beta_hat <= beta.
class ExpectedTables {
 public:
  ExpectedTables() = default;
  ExpectedTables(std::vector<int> quantities, PriceRange values, PriceRange costs);

  const std::vector<int>& quantities() const { return quantities_; }
  PriceRange values() const { return values_; }
  PriceRange costs() const { return costs_; }

  double buyer_utility(int demand, int value, int declared_demand, int declared_value) const;
  double seller_utility(int supply, int cost, int declared_supply, int declared_cost) const;
  double buyer_quantity(int declared_demand, int declared_value) const;
  double seller_quantity(int declared_supply, int declared_cost) const;

  void set_buyer_utility(int demand, int value, int declared_demand, int declared_value, double u);
  void set_seller_utility(int supply, int cost, int declared_supply, int declared_cost, double u);
  void set_buyer_quantity(int declared_demand, int declared_value, double q);
  void set_seller_quantity(int declared_supply, int declared_cost, double q);

  // Provenance.
  Estimator estimator = Estimator::MonteCarlo;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  bool isotonized = false;

  friend bool operator==(const ExpectedTables&, const ExpectedTables&) = default;

 private:
  std::size_t q_index(int q) const;
  std::size_t v_index(int v) const;
  std::size_t c_index(int c) const;
  std::size_t buyer_slot(int a, int v, int ah, int vh) const;
  std::size_t seller_slot(int b, int c, int bh, int ch) const;

  std::vector<int> quantities_;
  PriceRange values_;
  PriceRange costs_;
  std::vector<double> buyer_utility_;
  std::vector<double> seller_utility_;
  std::vector<double> buyer_quantity_;
  std::vector<double> seller_quantity_;
};

struct EstimateOptions {
  std::size_t samples = 1000;  // ignored by ExactEnumeration, but must be > 0
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::MonteCarlo;
  bool isotonize = false;
};

/// Bayesian expected-utility tables. In every sampled (or enumerated)
/// instance a tagged user replaces the first sampled user of its role and
/// declares each grid type in turn while everybody else is truthful; its
/// utility is scored against every true type with basic prices. All grid
/// points see the same instance stream. A spatial sample with no user of
/// the tagged role gets one added at a uniform position.
///
/// Throws InputError for samples == 0 or ExactEnumeration over a Spatial
/// population.
ExpectedTables estimate_tables(const Environment& env, const EstimateOptions& options);

/// Number of weighted outcomes ExactEnumeration visits per role.
std::size_t enumeration_size(const Environment& env, Role role);

/// Pool-adjacent-violators on Q^B / Q^S so they are monotone in both
/// declared price and declared quantity. Utilities are left untouched.
void isotonize_quantities(ExpectedTables& tables);

/// max |U^B(v, v_hat) - U^B(v-1, v_hat) - Q^B(v_hat)| over truthful-or-under
/// reported demand, and the seller analogue with +Q^S.
double check_arithmetic_progression(const ExpectedTables& tables);

/// Adjacent-IC payment search on one quantity slice. `utility[t][d]` is the expected
/// utility of true type index t declaring index d, with indices ordered so
/// the expected quantity is non-decreasing in d. Returns the total payment
/// per declared index. `on_raise(d, delta)` sees every increment.
std::vector<double> adjacent_ic_payments(const std::vector<std::vector<double>>& utility,
                                         const std::function<void(std::size_t, double)>& on_raise = {});

struct CalibrationOptions {
  /// Allowed slack on the expected-quantity monotonicity preconditions.
  double monotonicity_tolerance = 1e-9;
};

/// Runs adjacent_ic_payments per declared buyer demand and per declared seller supply
/// (costs mirrored so sellers reuse the buyer routine). Throws
/// CalibrationError naming every cell where Q^B falls with value or demand,
/// Q^S rises with cost or falls with supply, by more than the tolerance.
CorrectionTable compute_corrections(const ExpectedTables& tables, const CalibrationOptions& options = {});

enum class IcScope { AdjacentOnly, FullGrid };

std::string to_string(IcScope scope);
IcScope ic_scope_from_string(const std::string& name);

struct IcViolation {
  Role role = Role::Buyer;
  int true_quantity = 0;
  int true_price = 0;
  int declared_quantity = 0;
  int declared_price = 0;
  double gain = 0.0;  // corrected utility of the deviation minus truthful
};

/// AdjacentOnly checks price deviations one step away at the true quantity.
/// FullGrid checks every (quantity, price) declaration; sellers are never
/// tested for over-reporting supply. Gains up to `tolerance` are ignored.
std::vector<IcViolation> check_incentive_compatibility(const ExpectedTables& tables,
                                                       const CorrectionTable& corrections, IcScope scope,
                                                       double tolerance = 1e-9);

/// Truthful expected utility including the correction payment.
double corrected_truthful_utility(const ExpectedTables& tables, const CorrectionTable& corrections, Role role,
                                  int quantity, int price);

}  // namespace d2d
