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
#include <optional>
#include <set>
#include <vector>

#include "d2d/allocation.hpp"
#include "d2d/market.hpp"
#include "d2d/pricing.hpp"
#include "d2d/random.hpp"

namespace d2d {

/// Two modes share this struct. Round mode (run_rounds) reads the per-round
/// departure probability and arrival fraction. Rate mode (steady_state_K,
/// time_average_welfare) reads lambda, mu, p and T.
struct DynamicsConfig {
  double arrival_rate = 20.0;          // lambda, users per minute
  double departure_rate = 0.01;        // mu, per minute
  double retrade_probability = 0.5;    // p
  int round_interval = 10;             // T, minutes
  double departure_probability = 0.2;  // per round
  double arrival_fraction = 0.2;       // new users per round, as a fraction of rho

  void validate() const;

  friend bool operator==(const DynamicsConfig&, const DynamicsConfig&) = default;
};

struct RoundSummary {
  int round_index = 0;
  std::size_t participant_count = 0;
  long long welfare = 0;
  std::vector<PairId> trades;  // sorted
  long long switching_cost = 0;
  double budget_gap = 0.0;
};

/// Pairs in `next` that are absent from `prev`.
long long switching_cost(const std::set<PairId>& prev, const std::set<PairId>& next);

/// One trajectory of the round-mode market. Survivors keep id, type and
/// position; ids of newcomers continue per role.
class RoundSimulator {
 public:
  RoundSimulator(MarketConfig market, DynamicsConfig dynamics, EngineSpec engine, std::uint64_t seed,
                 std::optional<CorrectionTable> corrections = std::nullopt);

  const MarketInstance& instance() const { return instance_; }
  int round() const { return round_; }

  /// Allocates on the current population and records the summary.
  RoundSummary play();

  /// Departures, then arrivals; edges are rebuilt from positions.
  void advance();

 private:
  MarketConfig market_;
  DynamicsConfig dynamics_;
  EngineSpec engine_;
  std::uint64_t seed_;
  std::optional<CorrectionTable> corrections_;
  Rng rng_;
  MarketInstance instance_;
  int round_ = 0;
  int next_buyer_id_ = 1;
  int next_seller_id_ = 1;
  std::set<PairId> previous_;
};

std::vector<RoundSummary> run_rounds(const MarketConfig& market, const DynamicsConfig& dynamics,
                                     const EngineSpec& engine, int n_rounds, std::uint64_t seed,
                                     const std::optional<CorrectionTable>& corrections = std::nullopt);

/// Mean number of participants in steady state when each user re-trades
/// with probability p every T minutes. Throws DomainError unless mu > 0,
/// 0 <= p < 1, T >= 1 and lambda >= 0.
double steady_state_K(double lambda, double mu, double p, int T);

/// Expected greedy welfare per minute at trading interval T. Each sample
/// draws Poisson(K) users, splits them buyer/seller with probability 0.5,
/// gives everyone a single unit and runs the greedy engine. Sample s uses
/// the same stream for every T.
double time_average_welfare(const MarketConfig& market, const DynamicsConfig& dynamics, std::size_t samples,
                            std::uint64_t seed);

}  // namespace d2d
