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

#include "d2d/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "d2d/error.hpp"
#include "d2d/random.hpp"

namespace d2d {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("d2d_experiments_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ExperimentConfig, FlagsAndFileShareKeys) {
  const auto c = experiment_config_from_json(Json::parse(R"({
    "experiment": "switching-cost", "samples": 7, "seed": 11, "engines": ["distributed", "optimal"],
    "engine": {"engine": "greedy", "schedule": "async"}, "market": {"mean_user_count": 80},
    "dynamics": {"departure_probability": 0.3}, "output_path": "x"})"));
  EXPECT_EQ(c.samples, 7u);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.engines, (std::vector<Engine>{Engine::Distributed, Engine::Optimal}));
  EXPECT_EQ(c.engine.schedule, Schedule::SeededAsync);
  EXPECT_EQ(c.market.mean_user_count, 80.0);
  EXPECT_EQ(c.dynamics.departure_probability, 0.3);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(experiment_config_from_json(to_json(c)).seed, c.seed);
  EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"sample": 3})")), ConfigError);
  ExperimentConfig bad = c;
  bad.experiment = "dance";
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ExperimentConfig, OutputMetaCarriesVersionRngSeedAndConfig) {
  ExperimentConfig c;
  c.experiment = "run-auction";
  c.seed = 31;
  const auto meta = output_meta(c);
  EXPECT_FALSE(meta.at("version").get<std::string>().empty());
  EXPECT_EQ(meta.at("rng"), std::string(Rng::kName));
  EXPECT_EQ(meta.at("seed"), 31);
  EXPECT_EQ(meta.at("config").at("experiment"), "run-auction");
  const auto header = csv_header(c);
  EXPECT_NE(header.find("# rng: mt19937_64"), std::string::npos);
  EXPECT_NE(header.find("# seed: 31"), std::string::npos);
}

TEST(EfficiencySweep, ZeroRangeRatioIsOneByConvention) {
  ExperimentConfig c;
  c.market.mean_user_count = 50;
  c.comm_ranges = {0.0};
  c.samples = 5;
  const auto pts = run_efficiency_sweep(c);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].mean_ratio, 1.0);
  EXPECT_EQ(pts[0].mean_optimal_welfare, 0.0);
}

TEST(EfficiencySweep, RatiosStayWithinTheApproximationBand) {
  ExperimentConfig c;
  c.market.mean_user_count = 120;
  c.comm_ranges = {50, 150};
  c.samples = 10;
  for (const auto& p : run_efficiency_sweep(c)) {
    EXPECT_GE(p.min_ratio, 0.5);
    EXPECT_LE(p.mean_ratio, 1.0);
    EXPECT_LE(p.mean_greedy_welfare, p.mean_optimal_welfare);
  }
}

TEST(FrequencySweep, SinglePointMatchesTimeAverageWelfare) {
  ExperimentConfig c;
  c.intervals = {1};
  c.retrade_probabilities = {0.3};
  c.departure_rates = {0.01};
  c.samples = 20;
  c.seed = 4;
  const auto pts = run_frequency_sweep(c);
  ASSERT_EQ(pts.size(), 1u);
  DynamicsConfig d = c.dynamics;
  d.retrade_probability = 0.3;
  d.departure_rate = 0.01;
  d.round_interval = 1;
  EXPECT_EQ(pts[0].welfare, time_average_welfare(c.market, d, 20, 4));
}

TEST(FrequencySweep, NoArrivalsMeansNoWelfare) {
  ExperimentConfig c;
  c.dynamics.arrival_rate = 0.0;
  c.intervals = {1, 10, 40};
  c.samples = 5;
  for (const auto& p : run_frequency_sweep(c)) EXPECT_EQ(p.welfare, 0.0);
}

TEST(SwitchingCost, SparseMarketsBarelySwitch) {
  ExperimentConfig c;
  c.densities = {50};
  c.samples = 5;
  c.rounds = 4;
  for (const auto& p : run_switching_cost(c)) EXPECT_LT(p.mean_switching_cost, 2.0);
}

TEST(Calibrate, SingletonGridGivesZeroTableAndNoViolations) {
  ExperimentConfig c;
  c.experiment = "calibrate";
  c.environment.population = Population::Micro;
  c.environment.market.values = {6, 6};
  c.environment.market.costs = {2, 2};
  c.environment.market.quantities = {1};
  c.estimator = Estimator::ExactEnumeration;
  const auto r = calibrate(c);
  EXPECT_TRUE(r.corrections.all_zero());
  EXPECT_TRUE(r.violations_before.empty());
  EXPECT_TRUE(r.violations_after.empty());
}

TEST(Commands, RunAuctionOnInstanceA) {
  ExperimentConfig c;
  c.experiment = "run-auction";
  c.engine.engine = Engine::Greedy;
  c.instance_path = (fs::path(D2D_TEST_DATA_DIR) / "instance_a.json").string();
  c.output_path = scratch("auction").string();
  std::ostringstream log;
  ASSERT_EQ(run_experiment(c, log), 0);
  const auto summary = Json::parse(slurp(fs::path(c.output_path) / "summary.json"));
  EXPECT_EQ(summary.at("data").at("welfare"), 22);
  EXPECT_EQ(summary.at("data").at("budget_gap"), 0.0);
  EXPECT_EQ(summary.at("meta").at("rng"), "mt19937_64");
  for (const char* f : {"instance.json", "allocation.json", "trades.json"})
    EXPECT_TRUE(fs::exists(fs::path(c.output_path) / f)) << f;
}

TEST(Commands, MissingOutputPathIsAConfigError) {
  ExperimentConfig c;
  c.experiment = "run-auction";
  std::ostringstream log;
  EXPECT_THROW(run_experiment(c, log), ConfigError);
}

TEST(Commands, CalibrateAndCheckIcAgree) {
  ExperimentConfig c;
  c.experiment = "calibrate";
  c.environment.population = Population::Micro;
  c.environment.market.values = {5, 7};
  c.environment.market.costs = {0, 2};
  c.environment.market.quantities = {1, 2};
  c.estimator = Estimator::ExactEnumeration;
  c.output_path = scratch("calibrate").string();
  std::ostringstream log;
  ASSERT_EQ(run_experiment(c, log), 0);
  const auto report = Json::parse(slurp(fs::path(c.output_path) / "ic_report.json"));
  EXPECT_EQ(report.at("data").at("violations"), 0);
  EXPECT_GT(report.at("data").at("violations_before_calibration").get<int>(), 0);

  ExperimentConfig check;
  check.experiment = "check-ic";
  check.tables_path = (fs::path(c.output_path) / "tables.json").string();
  check.corrections_path = (fs::path(c.output_path) / "corrections.json").string();
  check.output_path = scratch("check").string();
  EXPECT_EQ(run_experiment(check, log), 0);
}

TEST(Commands, SweepsWriteHeaderedCsv) {
  ExperimentConfig c;
  c.experiment = "efficiency-sweep";
  c.market.mean_user_count = 40;
  c.comm_ranges = {100};
  c.samples = 2;
  c.output_path = scratch("sweep").string();
  std::ostringstream log;
  ASSERT_EQ(run_experiment(c, log), 0);
  const auto data = slurp(fs::path(c.output_path) / "efficiency.csv");
  EXPECT_EQ(data.rfind("# version: ", 0), 0u);
  EXPECT_NE(data.find("comm_range,samples,mean_ratio"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(c.output_path) / "efficiency.timing.csv"));
}

}  // namespace
}  // namespace d2d
