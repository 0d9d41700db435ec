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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "d2d/allocation.hpp"
#include "d2d/dynamics.hpp"
#include "d2d/incentives.hpp"
#include "d2d/market.hpp"
#include "d2d/serialization.hpp"

namespace d2d {

/// Experiment plumbing shared by the CLI and the acceptance runner. Every
/// field has a JSON key of the same name.
struct ExperimentConfig {
  std::string experiment;
  MarketConfig market;
  DynamicsConfig dynamics;
  EngineSpec engine{Engine::Distributed};
  std::size_t samples = 50;
  std::uint64_t seed = 1;
  std::string output_path;

  // efficiency-sweep
  std::vector<double> comm_ranges{20, 60, 100, 140, 200};
  // switching-cost
  std::vector<double> densities{500, 1000, 1500, 2000};
  std::vector<Engine> engines{Engine::Greedy, Engine::Optimal};
  int rounds = 5;
  // frequency-sweep
  std::vector<int> intervals;  // empty means 1..60
  std::vector<double> retrade_probabilities{0.3, 0.7};
  std::vector<double> departure_rates{0.01, 0.02};
  // calibrate / check-ic
  Environment environment;
  Estimator estimator = Estimator::MonteCarlo;
  bool isotonize = false;
  IcScope ic_scope = IcScope::FullGrid;
  // run-auction
  double rounds_per_period = 1.0;
  // optional input files
  std::string instance_path;
  std::string corrections_path;
  std::string tables_path;

  void validate() const;
};

Json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base = {});

const std::vector<std::string>& experiment_names();

/// {"version", "rng", "seed", "config"} block embedded in every output. The
/// config echo omits output_path.
Json output_meta(const ExperimentConfig& config);
/// The same block as '# key: value' lines for CSV files.
std::string csv_header(const ExperimentConfig& config);

struct EfficiencyPoint {
  double comm_range = 0.0;
  double mean_ratio = 0.0;
  double min_ratio = 0.0;
  double mean_greedy_welfare = 0.0;
  double mean_optimal_welfare = 0.0;
  double greedy_ms = 0.0;   // mean wall time per instance
  double optimal_ms = 0.0;
};

/// Greedy-side engine is config.engine (distributed or greedy). Sample s
/// uses the same user draw at every range; ratio is 1 when the optimum is 0.
std::vector<EfficiencyPoint> run_efficiency_sweep(const ExperimentConfig& config);

struct SwitchingPoint {
  double density = 0.0;
  Engine engine = Engine::Greedy;
  double mean_switching_cost = 0.0;  // per round after the first, averaged over seeds
  double mean_welfare = 0.0;
};

/// Seed s drives the same population trajectory for every engine.
std::vector<SwitchingPoint> run_switching_cost(const ExperimentConfig& config,
                                               std::vector<std::vector<RoundSummary>>* trajectories = nullptr);

struct FrequencyPoint {
  double retrade_probability = 0.0;
  double departure_rate = 0.0;
  int interval = 0;
  double participants = 0.0;  // K
  double welfare = 0.0;       // per minute
};

std::vector<FrequencyPoint> run_frequency_sweep(const ExperimentConfig& config);

struct CalibrationResult {
  ExpectedTables tables;
  CorrectionTable corrections;
  std::vector<IcViolation> violations_before;
  std::vector<IcViolation> violations_after;
};

CalibrationResult calibrate(const ExperimentConfig& config);

// Subcommands. Each writes into config.output_path (a directory, created on
// demand) and returns the process exit code: 0 success, 1 violation.
int cmd_run_auction(const ExperimentConfig& config, std::ostream& log);
int cmd_efficiency_sweep(const ExperimentConfig& config, std::ostream& log);
int cmd_switching_cost(const ExperimentConfig& config, std::ostream& log);
int cmd_frequency_sweep(const ExperimentConfig& config, std::ostream& log);
int cmd_calibrate(const ExperimentConfig& config, std::ostream& log);
int cmd_check_ic(const ExperimentConfig& config, std::ostream& log);

int run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace d2d
