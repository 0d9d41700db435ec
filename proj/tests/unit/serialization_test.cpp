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

#include "d2d/serialization.hpp"

#include <filesystem>

#include <gtest/gtest.h>

#include "d2d/error.hpp"

namespace d2d {
namespace {

TEST(Serialization, MarketConfigRoundTripsAndAcceptsPartialObjects) {
  MarketConfig c;
  c.cell_radius = 250.5;
  c.values = {3, 9};
  c.quantities = {1, 5};
  EXPECT_EQ(market_config_from_json(to_json(c)), c);
  const auto partial = market_config_from_json(Json::parse(R"({"comm_range": 42})"));
  EXPECT_EQ(partial.comm_range, 42.0);
  EXPECT_EQ(partial.mean_user_count, MarketConfig{}.mean_user_count);
  EXPECT_THROW(market_config_from_json(Json::parse(R"({"radius": 1})")), ConfigError);
  EXPECT_THROW(market_config_from_json(Json::parse(R"({"values": [1]})")), ConfigError);
  EXPECT_THROW(market_config_from_json(Json::parse(R"({"comm_range": "far"})")), ConfigError);
}

TEST(Serialization, DynamicsAndEngineRoundTrip) {
  DynamicsConfig d;
  d.round_interval = 17;
  d.retrade_probability = 0.25;
  EXPECT_EQ(dynamics_config_from_json(to_json(d)), d);
  EngineSpec e{Engine::Distributed, Schedule::SeededAsync, 99};
  EXPECT_EQ(engine_spec_from_json(to_json(e)), e);
  EXPECT_EQ(engine_spec_from_json(Json("optimal")).engine, Engine::Optimal);
}

TEST(Serialization, InstanceRoundTripsWithExplicitEdges) {
  MarketConfig c;
  c.cell_radius = 300;
  c.mean_user_count = 40;
  const auto inst = generate_market(c, 4);
  const auto j = to_json(inst);
  EXPECT_EQ(instance_from_json(j), inst);
  EXPECT_EQ(j.at("edges").size(), inst.edge_count());
  EXPECT_EQ(instance_from_json(Json::parse(j.dump())), inst);
}

TEST(Serialization, InstanceEdgesCanComeFromPositions) {
  const auto j = Json::parse(R"({
    "buyers": [{"id": 1, "quantity": 1, "unit_price": 7, "x": 0, "y": 0}],
    "sellers": [{"id": 1, "quantity": 1, "unit_price": 2, "x": 30, "y": 40},
                {"id": 2, "quantity": 1, "unit_price": 2, "x": 60, "y": 80}],
    "comm_range": 100})");
  const auto inst = instance_from_json(j);
  EXPECT_EQ(inst.edge_count(), 1u);
}

TEST(Serialization, InstanceErrorsAreInputErrors) {
  EXPECT_THROW(instance_from_json(Json::parse(R"({"buyers": []})")), InputError);
  EXPECT_THROW(instance_from_json(Json::parse(
                   R"({"buyers": [{"id": 1, "quantity": 1, "unit_price": 7}], "sellers": [], "edges": [[1, 3]]})")),
               InputError);
  EXPECT_THROW(instance_from_json(Json::parse(
                   R"({"buyers": [{"id": 1, "quantity": 1, "unit_price": 7, "role": "seller"}], "edges": []})")),
               InputError);
  EXPECT_THROW(instance_from_json(Json::parse(R"({"buyers": [{"id": 1}], "edges": []})")), InputError);
}

TEST(Serialization, InstanceAFixtureLoads) {
  const auto inst = instance_from_json(read_json_file(std::filesystem::path(D2D_TEST_DATA_DIR) / "instance_a.json"));
  EXPECT_EQ(inst.buyers().size(), 2u);
  EXPECT_EQ(inst.edge_count(), 4u);
  EXPECT_TRUE(validate_instance(inst).empty());
}

TEST(Serialization, CorrectionTableRoundTrips) {
  CorrectionTable t = CorrectionTable::zeros({1, 2}, {5, 6}, {0, 1});
  t.set_buyer(2, 6, 0.125, 0.5);
  t.set_seller(1, 0, 1.0 / 3.0, 0.7);
  EXPECT_EQ(correction_table_from_json(Json::parse(to_json(t).dump())), t);
}

TEST(Serialization, ExpectedTablesRoundTripWithProvenance) {
  ExpectedTables t({1, 2}, {5, 6}, {0, 1});
  t.set_buyer_utility(2, 6, 1, 5, 0.1 + 0.2);
  t.set_seller_utility(2, 1, 1, 0, -1.0 / 7.0);
  t.set_buyer_quantity(2, 5, 1.5);
  t.set_seller_quantity(1, 1, 0.25);
  t.estimator = Estimator::ExactEnumeration;
  t.sample_count = 77;
  t.seed = 123456789012345ULL;
  t.isotonized = true;
  const auto back = expected_tables_from_json(Json::parse(to_json(t).dump()));
  EXPECT_EQ(back, t);
}

TEST(Serialization, AllocationAndTradesListPositiveFlows) {
  Allocation a;
  a.engine = "greedy";
  a.iterations_used = 3;
  a.flows[{1, 2}] = 2;
  a.flows[{2, 2}] = 0;
  const auto j = to_json(a);
  EXPECT_EQ(j.at("flows").size(), 1u);
  EXPECT_EQ(j.at("flows")[0].at("units"), 2);
  EXPECT_EQ(j.at("iterations_used"), 3);
}

TEST(Serialization, MissingFileIsAnInputError) {
  EXPECT_THROW(read_json_file("/nonexistent/file.json"), InputError);
}

}  // namespace
}  // namespace d2d
