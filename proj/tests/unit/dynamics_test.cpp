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

#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "d2d/error.hpp"
#include "oracles.hpp"

namespace d2d {
namespace {

MarketConfig round_market(double rho = 150.0) {
  MarketConfig m;
  m.cell_radius = 400.0;
  m.mean_user_count = rho;
  m.comm_range = 100.0;
  return m;
}

TEST(SwitchingCost, CountsOnlyNewPairs) {
  EXPECT_EQ(switching_cost({{1, 1}}, {{1, 1}}), 0);
  EXPECT_EQ(switching_cost({{1, 1}}, {{1, 2}}), 1);
  EXPECT_EQ(switching_cost({}, {{1, 1}, {2, 2}}), 2);
  EXPECT_EQ(switching_cost({{1, 1}, {2, 2}}, {}), 0);
}

TEST(RunRounds, ZeroRoundsIsEmpty) {
  EXPECT_TRUE(run_rounds(round_market(), DynamicsConfig{}, EngineSpec{Engine::Greedy}, 0, 1).empty());
  EXPECT_THROW(run_rounds(round_market(), DynamicsConfig{}, EngineSpec{Engine::Greedy}, -1, 1), InputError);
}

TEST(RunRounds, EveryoneLeavingEmptiesTheMarket) {
  DynamicsConfig d;
  d.departure_probability = 1.0;
  d.arrival_fraction = 0.0;
  const auto rounds = run_rounds(round_market(), d, EngineSpec{Engine::Greedy}, 3, 4);
  ASSERT_EQ(rounds.size(), 3u);
  EXPECT_GT(rounds[0].participant_count, 0u);
  EXPECT_EQ(rounds[0].switching_cost, 0);
  EXPECT_EQ(rounds[1].participant_count, 0u);
  EXPECT_EQ(rounds[1].welfare, 0);
  EXPECT_TRUE(rounds[1].trades.empty());
}

TEST(RunRounds, StaticPopulationNeverSwitches) {
  DynamicsConfig d;
  d.departure_probability = 0.0;
  d.arrival_fraction = 0.0;
  for (Engine e : {Engine::Distributed, Engine::Greedy, Engine::Optimal}) {
    const auto rounds = run_rounds(round_market(), d, EngineSpec{e}, 4, 9);
    for (const auto& r : rounds) {
      EXPECT_EQ(r.switching_cost, 0) << to_string(e);
      EXPECT_EQ(r.trades, rounds[0].trades);
    }
  }
}

TEST(RunRounds, SurvivorsKeepIdTypeAndPosition) {
  RoundSimulator sim(round_market(), DynamicsConfig{}, EngineSpec{Engine::Greedy}, 21);
  for (int step = 0; step < 6; ++step) {
    std::map<int, Participant> before_b;
    std::map<int, Participant> before_s;
    for (const auto& b : sim.instance().buyers()) before_b[b.id] = b;
    for (const auto& s : sim.instance().sellers()) before_s[s.id] = s;
    const int max_b = before_b.empty() ? 0 : before_b.rbegin()->first;
    const int max_s = before_s.empty() ? 0 : before_s.rbegin()->first;
    sim.advance();
    for (const auto& b : sim.instance().buyers()) {
      auto it = before_b.find(b.id);
      if (it != before_b.end())
        EXPECT_EQ(it->second, b);
      else
        EXPECT_GT(b.id, max_b);
    }
    for (const auto& s : sim.instance().sellers()) {
      auto it = before_s.find(s.id);
      if (it != before_s.end())
        EXPECT_EQ(it->second, s);
      else
        EXPECT_GT(s.id, max_s);
    }
    EXPECT_TRUE(validate_instance(sim.instance(), round_market().comm_range).empty());
  }
}

TEST(RunRounds, PopulationHoversAroundRho) {
  // Departure 0.2 and arrivals 0.2 rho keep the mean at rho.
  double total = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (const auto& r : run_rounds(round_market(200.0), DynamicsConfig{}, EngineSpec{Engine::Greedy}, 6, seed)) {
      total += static_cast<double>(r.participant_count);
      ++n;
    }
  EXPECT_NEAR(total / n, 200.0, 10.0);
}

TEST(RunRounds, IsDeterministicAndReportsBudgetGap) {
  const auto m = round_market();
  CorrectionTable t = CorrectionTable::zeros(m.quantities, m.values, m.costs);
  for (int q : m.quantities)
    for (int v = m.values.lo; v <= m.values.hi; ++v) t.set_buyer(q, v, 0.5, 1.0);
  const auto a = run_rounds(m, DynamicsConfig{}, EngineSpec{Engine::Distributed}, 4, 5, t);
  const auto b = run_rounds(m, DynamicsConfig{}, EngineSpec{Engine::Distributed}, 4, 5, t);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].trades, b[k].trades);
    EXPECT_EQ(a[k].welfare, b[k].welfare);
    EXPECT_EQ(a[k].budget_gap, b[k].budget_gap);
    EXPECT_EQ(a[k].round_index, static_cast<int>(k));
  }
  EXPECT_GT(a[0].budget_gap, 0.0);
}

TEST(RunRounds, EnginesSeeTheSamePopulation) {
  const auto g = run_rounds(round_market(), DynamicsConfig{}, EngineSpec{Engine::Greedy}, 5, 33);
  const auto o = run_rounds(round_market(), DynamicsConfig{}, EngineSpec{Engine::Optimal}, 5, 33);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_EQ(g[k].participant_count, o[k].participant_count);
    EXPECT_LE(g[k].welfare, o[k].welfare);
  }
}

TEST(SteadyState, SpotValues) {
  EXPECT_NEAR(steady_state_K(20, 0.01, 0.5, 10), 345.84, 0.01);
  EXPECT_NEAR(steady_state_K(20, 0.01, 0.5, 10), testing::steady_state_fixed_point(20, 0.01, 0.5, 10), 1e-9);
  EXPECT_NEAR(steady_state_K(20, 0.01, 0.0, 1), 20 * std::exp(-0.01), 1e-12);
  EXPECT_NEAR(steady_state_K(20, 0.01, 0.0, 1), 19.801, 1e-3);
  EXPECT_EQ(steady_state_K(0, 0.01, 0.5, 10), 0.0);
}

TEST(SteadyState, DomainErrors) {
  EXPECT_THROW(steady_state_K(20, 0.0, 0.5, 10), DomainError);
  EXPECT_THROW(steady_state_K(20, -0.1, 0.5, 10), DomainError);
  EXPECT_THROW(steady_state_K(20, 0.01, 1.0, 10), DomainError);
  EXPECT_THROW(steady_state_K(20, 0.01, 0.5, 0), DomainError);
  EXPECT_THROW(steady_state_K(-1, 0.01, 0.5, 10), DomainError);
}

TEST(SteadyState, MonotoneInEveryArgument) {
  const std::vector<double> lambdas{1, 5, 20, 80};
  const std::vector<double> mus{0.005, 0.01, 0.05, 0.2};
  const std::vector<double> ps{0.0, 0.3, 0.7, 0.95};
  const std::vector<int> ts{1, 5, 20, 60};
  for (double l : lambdas)
    for (double mu : mus)
      for (double p : ps)
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
          EXPECT_LE(steady_state_K(l, mu, p, ts[k]), steady_state_K(l, mu, p, ts[k + 1]));
          EXPECT_LT(steady_state_K(l, mu, p, ts[k]), steady_state_K(l * 1.5, mu, p, ts[k]));
          EXPECT_GT(steady_state_K(l, mu, p, ts[k]), steady_state_K(l, mu * 1.5, p, ts[k]));
          EXPECT_LT(steady_state_K(l, mu, p, ts[k]), steady_state_K(l, mu, p + 0.02, ts[k]));
        }
}

TEST(TimeAverageWelfare, DegenerateInputsGiveZero) {
  DynamicsConfig d;
  d.arrival_rate = 0.0;
  EXPECT_EQ(time_average_welfare(MarketConfig{}, d, 10, 1), 0.0);
  MarketConfig no_range;
  no_range.comm_range = 0.0;
  for (int t : {1, 10, 30}) {
    DynamicsConfig dt;
    dt.round_interval = t;
    EXPECT_EQ(time_average_welfare(no_range, dt, 10, 1), 0.0);
  }
  EXPECT_THROW(time_average_welfare(MarketConfig{}, DynamicsConfig{}, 0, 1), InputError);
}

TEST(TimeAverageWelfare, SingleUnitTradesAndDeterminism) {
  DynamicsConfig d;
  d.round_interval = 5;
  MarketConfig m;
  const double a = time_average_welfare(m, d, 30, 8);
  EXPECT_EQ(a, time_average_welfare(m, d, 30, 8));
  EXPECT_GT(a, 0.0);
  // Per-minute welfare cannot exceed K/2 pairs each worth at most 10.
  EXPECT_LE(a * d.round_interval, steady_state_K(20, 0.01, 0.5, 5) * 10.0);
}

}  // namespace
}  // namespace d2d
