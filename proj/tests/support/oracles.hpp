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

// Test-only reference implementations. Nothing here shares code with the
// engines they check.

#include <cstdint>
#include <vector>

#include "d2d/incentives.hpp"
#include "d2d/market.hpp"
#include "d2d/random.hpp"

namespace d2d::testing {

/// Maximum of sum w_ij f_ij over every feasible integer flow, by memoized
/// search over buyers with the sellers' remaining supply as state. Uses all
/// edges regardless of sign.
long long brute_force_welfare(const MarketInstance& instance, const DeclarationProfile& decl);

struct MicroLimits {
  int max_buyers = 6;
  int max_sellers = 6;
  int max_quantity = 3;
  PriceRange values{5, 10};
  PriceRange costs{0, 5};
};

/// 1..max buyers and sellers, uniform types, each pair linked with a
/// per-instance probability drawn uniformly from [0.2, 1].
MarketInstance random_micro_instance(Rng& rng, const MicroLimits& limits = {});

/// Like random_micro_instance but every buyer/seller pair has a distinct
/// weight: values are multiples of 100 and costs are distinct below 100.
MarketInstance random_distinct_weight_instance(Rng& rng, const MicroLimits& limits = {});

/// Iterates K <- K p e^{-mu T} + sum_{t=0}^{T-1} lambda e^{-mu (T - t)} from
/// K = 0 until it stops moving.
double steady_state_fixed_point(double lambda, double mu, double p, int T);

/// Expected tagged-user outcomes on a micro environment by explicit
/// recursion over every edge subset and every other user's type.
struct TaggedExpectation {
  double utility = 0.0;
  double quantity = 0.0;
};
TaggedExpectation enumerate_buyer(const Environment& env, int demand, int value, int declared_demand,
                                  int declared_value);
TaggedExpectation enumerate_seller(const Environment& env, int supply, int cost, int declared_supply,
                                   int declared_cost);

}  // namespace d2d::testing
