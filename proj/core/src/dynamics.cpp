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

#include "d2d/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "d2d/error.hpp"

namespace d2d {

namespace {

constexpr std::uint64_t kAsyncStream = 0x6173796eULL;
constexpr std::uint64_t kFrequencyStream = 0x66726571ULL;

}  // namespace

void DynamicsConfig::validate() const {
  if (!(arrival_rate >= 0.0)) throw ConfigError("arrival_rate must be >= 0");
  if (!(departure_rate >= 0.0)) throw ConfigError("departure_rate must be >= 0");
  if (!(retrade_probability >= 0.0 && retrade_probability < 1.0))
    throw ConfigError("retrade_probability must be in [0, 1)");
  if (round_interval < 1) throw ConfigError("round_interval must be >= 1");
  if (!(departure_probability >= 0.0 && departure_probability <= 1.0))
    throw ConfigError("departure_probability must be in [0, 1]");
  if (!(arrival_fraction >= 0.0)) throw ConfigError("arrival_fraction must be >= 0");
}

long long switching_cost(const std::set<PairId>& prev, const std::set<PairId>& next) {
  long long n = 0;
  for (const auto& pair : next)
    if (!prev.contains(pair)) ++n;
  return n;
}

RoundSimulator::RoundSimulator(MarketConfig market, DynamicsConfig dynamics, EngineSpec engine, std::uint64_t seed,
                               std::optional<CorrectionTable> corrections)
    : market_(std::move(market)),
      dynamics_(dynamics),
      engine_(engine),
      seed_(seed),
      corrections_(std::move(corrections)),
      rng_(seed) {
  market_.validate();
  dynamics_.validate();
  instance_ = generate_population(market_, rng_.poisson(market_.mean_user_count), rng_);
  for (const auto& b : instance_.buyers()) next_buyer_id_ = std::max(next_buyer_id_, b.id + 1);
  for (const auto& s : instance_.sellers()) next_seller_id_ = std::max(next_seller_id_, s.id + 1);
}

RoundSummary RoundSimulator::play() {
  const auto decl = DeclarationProfile::truthful(instance_);
  EngineSpec spec = engine_;
  spec.async_seed = derive_seed(engine_.async_seed ^ seed_, kAsyncStream, static_cast<std::uint64_t>(round_));
  const auto alloc = allocate(instance_, decl, spec);

  RoundSummary summary;
  summary.round_index = round_;
  summary.participant_count = instance_.participant_count();
  summary.welfare = social_welfare(instance_, decl, alloc);
  std::set<PairId> current;
  for (const auto& [pair, f] : alloc.flows)
    if (f > 0) current.insert(pair);
  summary.trades.assign(current.begin(), current.end());
  summary.switching_cost = round_ == 0 ? 0 : switching_cost(previous_, current);
  if (corrections_) summary.budget_gap = price_round(instance_, decl, alloc, *corrections_).budget_gap;
  previous_ = std::move(current);
  return summary;
}

void RoundSimulator::advance() {
  std::vector<Participant> buyers;
  std::vector<Participant> sellers;
  for (const auto& b : instance_.buyers())
    if (!rng_.bernoulli(dynamics_.departure_probability)) buyers.push_back(b);
  for (const auto& s : instance_.sellers())
    if (!rng_.bernoulli(dynamics_.departure_probability)) sellers.push_back(s);

  const auto arrivals = rng_.poisson(dynamics_.arrival_fraction * market_.mean_user_count);
  for (std::int64_t k = 0; k < arrivals; ++k) {
    Participant p;
    p.position = sample_position(rng_, market_.cell_radius);
    p.type = sample_user_type(rng_, market_);
    if (p.type.role == Role::Buyer) {
      p.id = next_buyer_id_++;
      buyers.push_back(p);
    } else {
      p.id = next_seller_id_++;
      sellers.push_back(p);
    }
  }
  instance_ = MarketInstance::from_positions(std::move(buyers), std::move(sellers), market_.comm_range);
  ++round_;
}

std::vector<RoundSummary> run_rounds(const MarketConfig& market, const DynamicsConfig& dynamics,
                                     const EngineSpec& engine, int n_rounds, std::uint64_t seed,
                                     const std::optional<CorrectionTable>& corrections) {
  if (n_rounds < 0) throw InputError("n_rounds must be >= 0");
  std::vector<RoundSummary> out;
  if (n_rounds == 0) return out;
  RoundSimulator sim(market, dynamics, engine, seed, corrections);
  for (int r = 0; r < n_rounds; ++r) {
    if (r > 0) sim.advance();
    out.push_back(sim.play());
  }
  return out;
}

double steady_state_K(double lambda, double mu, double p, int T) {
  if (!(mu > 0.0)) throw DomainError("steady_state_K: mu must be > 0");
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("steady_state_K: p must be in [0, 1)");
  if (T < 1) throw DomainError("steady_state_K: T must be >= 1");
  if (!(lambda >= 0.0)) throw DomainError("steady_state_K: lambda must be >= 0");
  const double decay_T = std::exp(-mu * T);
  const double decay_1 = std::exp(-mu);
  return lambda * decay_1 * (1.0 - decay_T) / ((1.0 - p * decay_T) * (1.0 - decay_1));
}

double time_average_welfare(const MarketConfig& market, const DynamicsConfig& dynamics, std::size_t samples,
                            std::uint64_t seed) {
  if (samples == 0) throw InputError("time_average_welfare: samples must be > 0");
  const double K = steady_state_K(dynamics.arrival_rate, dynamics.departure_rate, dynamics.retrade_probability,
                                  dynamics.round_interval);
  MarketConfig single = market;
  single.quantities = {1};
  single.buyer_probability = 0.5;
  single.validate();

  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng(derive_seed(seed, kFrequencyStream, s));
    const auto instance = generate_population(single, rng.poisson(K), rng);
    const auto decl = DeclarationProfile::truthful(instance);
    total += static_cast<double>(social_welfare(instance, decl, allocate_centralized_greedy(instance, decl)));
  }
  return total / static_cast<double>(samples) / static_cast<double>(dynamics.round_interval);
}

}  // namespace d2d
