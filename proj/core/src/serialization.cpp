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

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "d2d/error.hpp"

namespace d2d {

namespace {

void require_object(const Json& j, std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
}

void reject_unknown(const Json& j, std::initializer_list<std::string_view> keys, std::string_view what) {
  require_object(j, what);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, std::string_view what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + "." + key + ": " + e.what());
  }
}

Json range_json(PriceRange r) { return Json::array({r.lo, r.hi}); }

PriceRange range_from(const Json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ConfigError(std::string(what) + ": expected [lo, hi]");
  return {j[0].get<int>(), j[1].get<int>()};
}

Json participant_json(const Participant& p) {
  return Json{{"id", p.id},
              {"role", to_string(p.type.role)},
              {"quantity", p.type.quantity},
              {"unit_price", p.type.unit_price},
              {"x", p.position.x},
              {"y", p.position.y}};
}

Participant participant_from(const Json& j, Role expected) {
  reject_unknown(j, {"id", "role", "quantity", "unit_price", "x", "y"}, "participant");
  for (const char* key : {"id", "quantity", "unit_price"})
    if (!j.contains(key)) throw InputError(std::string("participant: missing '") + key + "'");
  Participant p;
  try {
    p.id = j.at("id").get<int>();
    p.type.quantity = j.at("quantity").get<int>();
    p.type.unit_price = j.at("unit_price").get<int>();
    p.position.x = j.value("x", 0.0);
    p.position.y = j.value("y", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("participant: ") + e.what());
  }
  p.type.role = expected;
  if (j.contains("role") && j.at("role") != to_string(expected))
    throw InputError("participant " + std::to_string(p.id) + ": role does not match its list");
  return p;
}

Json entries_json(const std::map<CorrectionTable::Key, CorrectionEntry>& entries) {
  Json arr = Json::array();
  for (const auto& [key, e] : entries)
    arr.push_back(Json{{"quantity", key.first},
                       {"price", key.second},
                       {"total", e.total},
                       {"expected_quantity", e.expected_quantity},
                       {"per_unit", e.per_unit}});
  return arr;
}

}  // namespace

Json to_json(const MarketConfig& c) {
  return Json{{"cell_radius", c.cell_radius},
              {"mean_user_count", c.mean_user_count},
              {"comm_range", c.comm_range},
              {"values", range_json(c.values)},
              {"costs", range_json(c.costs)},
              {"quantities", c.quantities},
              {"buyer_probability", c.buyer_probability}};
}

MarketConfig market_config_from_json(const Json& j, MarketConfig c) {
  constexpr std::string_view what = "market";
  reject_unknown(j, {"cell_radius", "mean_user_count", "comm_range", "values", "costs", "quantities",
                     "buyer_probability"},
                 what);
  read(j, "cell_radius", c.cell_radius, what);
  read(j, "mean_user_count", c.mean_user_count, what);
  read(j, "comm_range", c.comm_range, what);
  if (j.contains("values")) c.values = range_from(j.at("values"), "market.values");
  if (j.contains("costs")) c.costs = range_from(j.at("costs"), "market.costs");
  read(j, "quantities", c.quantities, what);
  read(j, "buyer_probability", c.buyer_probability, what);
  return c;
}

Json to_json(const DynamicsConfig& c) {
  return Json{{"arrival_rate", c.arrival_rate},
              {"departure_rate", c.departure_rate},
              {"retrade_probability", c.retrade_probability},
              {"round_interval", c.round_interval},
              {"departure_probability", c.departure_probability},
              {"arrival_fraction", c.arrival_fraction}};
}

DynamicsConfig dynamics_config_from_json(const Json& j, DynamicsConfig c) {
  constexpr std::string_view what = "dynamics";
  reject_unknown(j, {"arrival_rate", "departure_rate", "retrade_probability", "round_interval",
                     "departure_probability", "arrival_fraction"},
                 what);
  read(j, "arrival_rate", c.arrival_rate, what);
  read(j, "departure_rate", c.departure_rate, what);
  read(j, "retrade_probability", c.retrade_probability, what);
  read(j, "round_interval", c.round_interval, what);
  read(j, "departure_probability", c.departure_probability, what);
  read(j, "arrival_fraction", c.arrival_fraction, what);
  return c;
}

Json to_json(const EngineSpec& s) {
  return Json{{"engine", to_string(s.engine)}, {"schedule", to_string(s.schedule)}, {"async_seed", s.async_seed}};
}

EngineSpec engine_spec_from_json(const Json& j, EngineSpec s) {
  if (j.is_string()) {
    s.engine = engine_from_string(j.get<std::string>());
    return s;
  }
  reject_unknown(j, {"engine", "schedule", "async_seed"}, "engine");
  if (j.contains("engine")) s.engine = engine_from_string(j.at("engine").get<std::string>());
  if (j.contains("schedule")) s.schedule = schedule_from_string(j.at("schedule").get<std::string>());
  read(j, "async_seed", s.async_seed, "engine");
  return s;
}

Json to_json(const Environment& env) {
  Json j{{"market", to_json(env.market)},
         {"population", to_string(env.population)},
         {"micro",
          Json{{"buyers", env.micro.buyers},
               {"sellers", env.micro.sellers},
               {"edge_probability", env.micro.edge_probability}}},
         {"engine", to_json(env.engine)}};
  if (env.fixed_instance) j["fixed_instance"] = to_json(*env.fixed_instance);
  return j;
}

Environment environment_from_json(const Json& j, Environment env) {
  reject_unknown(j, {"market", "population", "micro", "engine", "fixed_instance"}, "environment");
  if (j.contains("market")) env.market = market_config_from_json(j.at("market"), env.market);
  if (j.contains("population")) env.population = population_from_string(j.at("population").get<std::string>());
  if (j.contains("micro")) {
    const auto& m = j.at("micro");
    reject_unknown(m, {"buyers", "sellers", "edge_probability"}, "environment.micro");
    read(m, "buyers", env.micro.buyers, "environment.micro");
    read(m, "sellers", env.micro.sellers, "environment.micro");
    read(m, "edge_probability", env.micro.edge_probability, "environment.micro");
  }
  if (j.contains("engine")) env.engine = engine_spec_from_json(j.at("engine"), env.engine);
  if (j.contains("fixed_instance")) env.fixed_instance = instance_from_json(j.at("fixed_instance"));
  return env;
}

Json to_json(const MarketInstance& instance) {
  Json buyers = Json::array();
  Json sellers = Json::array();
  for (const auto& b : instance.buyers()) buyers.push_back(participant_json(b));
  for (const auto& s : instance.sellers()) sellers.push_back(participant_json(s));
  Json edges = Json::array();
  for (const auto& e : instance.edges())
    edges.push_back(Json::array({instance.buyers()[e.buyer].id, instance.sellers()[e.seller].id}));
  return Json{{"buyers", buyers}, {"sellers", sellers}, {"edges", edges}};
}

MarketInstance instance_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("instance: expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (key != "buyers" && key != "sellers" && key != "edges" && key != "comm_range")
      throw InputError("instance: unknown key '" + key + "'");
  std::vector<Participant> buyers;
  std::vector<Participant> sellers;
  if (j.contains("buyers"))
    for (const auto& b : j.at("buyers")) buyers.push_back(participant_from(b, Role::Buyer));
  if (j.contains("sellers"))
    for (const auto& s : j.at("sellers")) sellers.push_back(participant_from(s, Role::Seller));

  if (!j.contains("edges")) {
    if (!j.contains("comm_range")) throw InputError("instance: needs 'edges' or 'comm_range'");
    return MarketInstance::from_positions(std::move(buyers), std::move(sellers), j.at("comm_range").get<double>());
  }
  std::map<int, std::size_t> bidx;
  std::map<int, std::size_t> sidx;
  for (std::size_t i = 0; i < buyers.size(); ++i)
    if (!bidx.emplace(buyers[i].id, i).second)
      throw InputError("instance: duplicate buyer id " + std::to_string(buyers[i].id));
  for (std::size_t k = 0; k < sellers.size(); ++k)
    if (!sidx.emplace(sellers[k].id, k).second)
      throw InputError("instance: duplicate seller id " + std::to_string(sellers[k].id));
  std::vector<EdgeRef> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw InputError("instance: edge must be [buyer_id, seller_id]");
    const int b = e[0].get<int>();
    const int s = e[1].get<int>();
    const auto bi = bidx.find(b);
    const auto si = sidx.find(s);
    if (bi == bidx.end() || si == sidx.end())
      throw InputError("instance: edge (" + std::to_string(b) + "," + std::to_string(s) + ") names an unknown user");
    edges.push_back({bi->second, si->second});
  }
  return MarketInstance::from_edges(std::move(buyers), std::move(sellers), edges);
}

Json to_json(const Allocation& alloc) {
  Json flows = Json::array();
  for (const auto& [pair, units] : alloc.flows)
    if (units > 0) flows.push_back(Json{{"buyer_id", pair.first}, {"seller_id", pair.second}, {"units", units}});
  return Json{{"engine", alloc.engine}, {"iterations_used", alloc.iterations_used}, {"flows", flows}};
}

Json to_json(const PricedRound& round) {
  Json trades = Json::array();
  for (const auto& t : round.trades)
    trades.push_back(Json{{"buyer_id", t.buyer_id},
                          {"seller_id", t.seller_id},
                          {"units", t.units},
                          {"buy_price", t.buy_price},
                          {"sell_price", t.sell_price},
                          {"buyer_correction", t.buyer_correction},
                          {"seller_correction", t.seller_correction}});
  return Json{{"trades", trades}, {"budget_gap", round.budget_gap}};
}

Json to_json(const CorrectionTable& table) {
  return Json{{"buyers", entries_json(table.buyer_entries())}, {"sellers", entries_json(table.seller_entries())}};
}

CorrectionTable correction_table_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("corrections: expected a JSON object");
  CorrectionTable table;
  auto load = [&](const char* side, bool buyer) {
    if (!j.contains(side)) return;
    for (const auto& e : j.at(side)) {
      try {
        const int q = e.at("quantity").get<int>();
        const int p = e.at("price").get<int>();
        const double total = e.at("total").get<double>();
        const double eq = e.at("expected_quantity").get<double>();
        if (buyer)
          table.set_buyer(q, p, total, eq);
        else
          table.set_seller(q, p, total, eq);
      } catch (const nlohmann::json::exception& ex) {
        throw InputError(std::string("corrections.") + side + ": " + ex.what());
      }
    }
  };
  load("buyers", true);
  load("sellers", false);
  return table;
}

Json to_json(const ExpectedTables& t) {
  const auto vs = t.values().values();
  const auto cs = t.costs().values();
  Json bu = Json::array();
  Json su = Json::array();
  Json bq = Json::array();
  Json sq = Json::array();
  for (int a : t.quantities()) {
    for (int v : vs) {
      bq.push_back(Json::array({a, v, t.buyer_quantity(a, v)}));
      for (int ah : t.quantities())
        for (int vh : vs) bu.push_back(Json::array({a, v, ah, vh, t.buyer_utility(a, v, ah, vh)}));
    }
    for (int c : cs) {
      sq.push_back(Json::array({a, c, t.seller_quantity(a, c)}));
      for (int bh : t.quantities()) {
        if (bh > a) continue;
        for (int ch : cs) su.push_back(Json::array({a, c, bh, ch, t.seller_utility(a, c, bh, ch)}));
      }
    }
  }
  return Json{{"provenance",
               Json{{"estimator", to_string(t.estimator)},
                    {"samples", t.sample_count},
                    {"seed", t.seed},
                    {"isotonized", t.isotonized}}},
              {"quantities", t.quantities()},
              {"values", range_json(t.values())},
              {"costs", range_json(t.costs())},
              {"buyer_quantity", bq},
              {"seller_quantity", sq},
              {"buyer_utility", bu},
              {"seller_utility", su}};
}

ExpectedTables expected_tables_from_json(const Json& j) {
  try {
    ExpectedTables t(j.at("quantities").get<std::vector<int>>(), range_from(j.at("values"), "tables.values"),
                     range_from(j.at("costs"), "tables.costs"));
    const auto& p = j.at("provenance");
    t.estimator = estimator_from_string(p.at("estimator").get<std::string>());
    t.sample_count = p.at("samples").get<std::size_t>();
    t.seed = p.at("seed").get<std::uint64_t>();
    t.isotonized = p.at("isotonized").get<bool>();
    for (const auto& r : j.at("buyer_quantity")) t.set_buyer_quantity(r[0], r[1], r[2]);
    for (const auto& r : j.at("seller_quantity")) t.set_seller_quantity(r[0], r[1], r[2]);
    for (const auto& r : j.at("buyer_utility")) t.set_buyer_utility(r[0], r[1], r[2], r[3], r[4]);
    for (const auto& r : j.at("seller_utility")) t.set_seller_utility(r[0], r[1], r[2], r[3], r[4]);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("tables: ") + e.what());
  }
}

Json to_json(const RoundSummary& s) {
  Json trades = Json::array();
  for (const auto& [b, sl] : s.trades) trades.push_back(Json::array({b, sl}));
  return Json{{"round", s.round_index},
              {"participants", s.participant_count},
              {"welfare", s.welfare},
              {"switching_cost", s.switching_cost},
              {"budget_gap", s.budget_gap},
              {"trades", trades}};
}

Json to_json(const IcViolation& v) {
  return Json{{"role", to_string(v.role)},
              {"true_quantity", v.true_quantity},
              {"true_price", v.true_price},
              {"declared_quantity", v.declared_quantity},
              {"declared_price", v.declared_price},
              {"gain", v.gain}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace d2d
