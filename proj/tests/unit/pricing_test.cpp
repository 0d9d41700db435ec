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

#include <gtest/gtest.h>

#include "d2d/error.hpp"
#include "oracles.hpp"

namespace d2d {
namespace {

Participant buyer(int id, int alpha, int v) { return {id, {Role::Buyer, alpha, v}, {}}; }
Participant seller(int id, int beta, int c) { return {id, {Role::Seller, beta, c}, {}}; }

MarketInstance instance_a() {
  std::vector<EdgeRef> all{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  return MarketInstance::from_edges({buyer(1, 2, 10), buyer(2, 1, 8)}, {seller(1, 1, 0), seller(2, 2, 3)}, all);
}

TEST(BasicPrice, IsTheMidpoint) {
  EXPECT_DOUBLE_EQ(basic_price(8, 2), 5.0);
  EXPECT_DOUBLE_EQ(basic_price(5, 5), 5.0);
  EXPECT_DOUBLE_EQ(basic_price(10, 0), 5.0);
  EXPECT_DOUBLE_EQ(basic_price(7, 2), 4.5);
}

TEST(FinalPrices, SubtractBuyerAndAddSellerCorrection) {
  auto p = final_prices(8, 2, 0.5, 0.25);
  EXPECT_DOUBLE_EQ(p.buyer, 4.5);
  EXPECT_DOUBLE_EQ(p.seller, 5.25);
  p = final_prices(8, 2, 0, 0);
  EXPECT_DOUBLE_EQ(p.buyer, 5.0);
  EXPECT_DOUBLE_EQ(p.seller, 5.0);
  p = final_prices(6, 4, 1.0, 0);
  EXPECT_DOUBLE_EQ(p.buyer, 4.0);
  EXPECT_DOUBLE_EQ(p.seller, 5.0);
  EXPECT_THROW(final_prices(6, 4, -0.1, 0), InputError);
  EXPECT_THROW(final_prices(6, 4, 0, -0.1), InputError);
}

TEST(Utility, BuyerExamples) {
  EXPECT_DOUBLE_EQ(buyer_utility(2, 10, {{1, 1}, {2, 1}}, {{1, 5.0}, {2, 6.5}}), 8.5);
  EXPECT_DOUBLE_EQ(buyer_utility(1, 10, {{1, 2}}, {{1, 4.0}}), 2.0);
  EXPECT_DOUBLE_EQ(buyer_utility(3, 10, {}, {}), 0.0);
  EXPECT_THROW(buyer_utility(1, 10, {{1, 1}}, {}), InputError);
}

TEST(Utility, SellerExamples) {
  EXPECT_DOUBLE_EQ(seller_utility(3, {{1, 2}}, {{1, 5.25}}), 4.5);
  EXPECT_DOUBLE_EQ(seller_utility(3, {{1, 2}, {2, 1}}, {{1, 3.0}, {2, 3.0}}), 0.0);
  EXPECT_DOUBLE_EQ(seller_utility(3, {}, {}), 0.0);
}

TEST(CorrectionTable, PerUnitIsTotalOverExpectedQuantity) {
  CorrectionTable t;
  t.set_buyer(2, 7, 0.6, 1.5);
  EXPECT_DOUBLE_EQ(t.buyer(2, 7).per_unit, 0.4);
  t.set_seller(1, 3, 0.5, 0.0);
  EXPECT_DOUBLE_EQ(t.seller(1, 3).per_unit, 0.0);
  EXPECT_THROW(t.set_buyer(1, 5, -1.0, 1.0), CalibrationError);
  EXPECT_THROW(t.buyer(4, 4), CalibrationError);
  EXPECT_FALSE(t.all_zero());
  EXPECT_TRUE(CorrectionTable::zeros({1, 2}, {5, 6}, {0, 1}).all_zero());
}

TEST(PriceRound, ZeroCorrectionsTradeAtBasicPrices) {
  const auto inst = instance_a();
  const auto decl = DeclarationProfile::truthful(inst);
  const auto alloc = allocate_centralized_greedy(inst, decl);
  const auto round = price_round(inst, decl, alloc, CorrectionTable::zeros({1, 2}, {5, 10}, {0, 5}));
  EXPECT_DOUBLE_EQ(round.budget_gap, 0.0);
  std::map<PairId, double> prices;
  for (const auto& t : round.trades) {
    EXPECT_DOUBLE_EQ(t.buy_price, t.sell_price);
    prices[{t.buyer_id, t.seller_id}] = t.buy_price;
  }
  EXPECT_EQ(prices, (std::map<PairId, double>{{{1, 1}, 5.0}, {{1, 2}, 6.5}, {{2, 2}, 5.5}}));
}

TEST(PriceRound, BudgetGapIsUnitsTimesBothCorrections) {
  const auto inst = MarketInstance::from_edges({buyer(1, 2, 8)}, {seller(1, 2, 2)}, std::vector<EdgeRef>{{0, 0}});
  const auto decl = DeclarationProfile::truthful(inst);
  CorrectionTable t;
  t.set_buyer(2, 8, 1.0, 2.0);   // g = 0.5
  t.set_seller(2, 2, 0.5, 2.0);  // h = 0.25
  const auto round = price_round(inst, decl, allocate_centralized_greedy(inst, decl), t);
  ASSERT_EQ(round.trades.size(), 1u);
  EXPECT_EQ(round.trades[0].units, 2);
  EXPECT_DOUBLE_EQ(round.budget_gap, 1.5);
  EXPECT_DOUBLE_EQ(round.trades[0].buy_price, 4.5);
  EXPECT_DOUBLE_EQ(round.trades[0].sell_price, 5.25);
}

TEST(PriceRound, MissingEntryIsACoverageError) {
  const auto inst = instance_a();
  const auto decl = DeclarationProfile::truthful(inst);
  EXPECT_THROW(price_round(inst, decl, allocate_centralized_greedy(inst, decl), CorrectionTable{}), CalibrationError);
}

TEST(PriceRound, InfeasibleAllocationIsRejected) {
  const auto inst = instance_a();
  Allocation a;
  a.flows[{2, 2}] = 5;
  EXPECT_THROW(price_round(inst, DeclarationProfile::truthful(inst), a, CorrectionTable::zeros({1, 2}, {5, 10}, {0, 5})),
               FeasibilityError);
}

// Random non-negative tables on random truthful markets: individual
// rationality, the budget identity, locality and symmetric surplus.
TEST(PriceRound, PropertiesOnRandomMarkets) {
  Rng rng(90210);
  for (int k = 0; k < 500; ++k) {
    const auto inst = testing::random_micro_instance(rng);
    const auto decl = DeclarationProfile::truthful(inst);
    CorrectionTable table = CorrectionTable::zeros({1, 2, 3}, {5, 10}, {0, 5});
    const bool zero = k % 2 == 0;
    if (!zero) {
      for (int q = 1; q <= 3; ++q) {
        for (int v = 5; v <= 10; ++v) table.set_buyer(q, v, rng.uniform(0.0, 2.0), rng.uniform(0.5, 3.0));
        for (int c = 0; c <= 5; ++c) table.set_seller(q, c, rng.uniform(0.0, 2.0), rng.uniform(0.5, 3.0));
      }
    }
    for (Engine e : {Engine::Distributed, Engine::Greedy, Engine::Optimal}) {
      const auto alloc = allocate(inst, decl, EngineSpec{e});
      const auto round = price_round(inst, decl, alloc, table);
      double gap = 0.0;
      for (const auto& t : round.trades) {
        const auto& b = inst.buyers()[*inst.buyer_index(t.buyer_id)].type;
        const auto& s = inst.sellers()[*inst.seller_index(t.seller_id)].type;
        ASSERT_GT(t.units, 0);
        ASSERT_LE(t.buy_price, b.unit_price);
        ASSERT_GE(t.sell_price, s.unit_price);
        ASSERT_NEAR(t.sell_price - t.buy_price, t.buyer_correction + t.seller_correction, 1e-9);
        const auto local = final_prices(b.unit_price, s.unit_price, table.buyer(b.quantity, b.unit_price).per_unit,
                                        table.seller(s.quantity, s.unit_price).per_unit);
        ASSERT_EQ(local.buyer, t.buy_price);
        ASSERT_EQ(local.seller, t.sell_price);
        if (zero) ASSERT_DOUBLE_EQ(b.unit_price - t.buy_price, t.sell_price - s.unit_price);
        gap += t.units * (t.buyer_correction + t.seller_correction);
      }
      ASSERT_NEAR(round.budget_gap, gap, 1e-9);
      if (zero) ASSERT_EQ(round.budget_gap, 0.0);
    }
  }
}

TEST(SubscriptionFee, SpreadsTheGapOverParticipants) {
  EXPECT_DOUBLE_EQ(subscription_fee(12.0, 10.0, 40.0), 3.0);
  EXPECT_DOUBLE_EQ(subscription_fee(12.0, 10.0, 0.0), 0.0);
  EXPECT_THROW(subscription_fee(-1.0, 1.0, 1.0), InputError);
}

}  // namespace
}  // namespace d2d
