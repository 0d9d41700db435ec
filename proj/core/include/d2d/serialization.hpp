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

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "d2d/allocation.hpp"
#include "d2d/dynamics.hpp"
#include "d2d/incentives.hpp"
#include "d2d/market.hpp"
#include "d2d/pricing.hpp"

namespace d2d {

using Json = nlohmann::ordered_json;

// Config readers accept partial objects; missing keys keep their defaults.
// Unknown keys are rejected with ConfigError.

Json to_json(const MarketConfig& config);
MarketConfig market_config_from_json(const Json& j, MarketConfig base = {});

Json to_json(const DynamicsConfig& config);
DynamicsConfig dynamics_config_from_json(const Json& j, DynamicsConfig base = {});

Json to_json(const EngineSpec& spec);
EngineSpec engine_spec_from_json(const Json& j, EngineSpec base = {});

Json to_json(const Environment& env);
Environment environment_from_json(const Json& j, Environment base = {});

/// {"buyers": [...], "sellers": [...], "edges": [[buyer_id, seller_id], ...]}.
/// When "edges" is absent, "comm_range" must be present and edges come from
/// positions.
Json to_json(const MarketInstance& instance);
MarketInstance instance_from_json(const Json& j);

Json to_json(const Allocation& alloc);
Json to_json(const PricedRound& round);

Json to_json(const CorrectionTable& table);
CorrectionTable correction_table_from_json(const Json& j);

Json to_json(const ExpectedTables& tables);
ExpectedTables expected_tables_from_json(const Json& j);

Json to_json(const RoundSummary& summary);
Json to_json(const IcViolation& violation);

/// Throws InputError with the path when the file is missing or malformed.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace d2d
