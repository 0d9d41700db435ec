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

// d2d-auction: command line front end for the auction simulator.
//
//   d2d-auction <experiment> [--config FILE] [--seed N] [--samples N]
//               [--engine distributed|greedy|optimal] [--schedule sync|async]
//               --out DIR
//
// Exit codes: 0 success, 1 violation or runtime failure, 2 usage.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "d2d/error.hpp"
#include "d2d/experiments.hpp"
#include "d2d/serialization.hpp"

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::string> engine;
  std::optional<std::string> schedule;
  std::optional<std::string> out;
  std::optional<std::string> instance;
  std::optional<std::string> corrections;
  std::optional<std::string> tables;
  std::optional<std::string> estimator;
  std::optional<std::string> scope;
  std::optional<int> rounds;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--samples", f.samples, "samples (or seeds) per point");
  sub->add_option("--engine", f.engine, "distributed|greedy|optimal");
  sub->add_option("--schedule", f.schedule, "sync|async");
  sub->add_option("--out", f.out, "output directory");
}

d2d::ExperimentConfig resolve(const std::string& experiment, const Flags& f) {
  d2d::ExperimentConfig c;
  if (!f.config.empty()) c = d2d::experiment_config_from_json(d2d::read_json_file(f.config));
  c.experiment = experiment;
  if (f.seed) c.seed = *f.seed;
  if (f.samples) c.samples = *f.samples;
  if (f.engine) {
    c.engine.engine = d2d::engine_from_string(*f.engine);
    c.environment.engine.engine = c.engine.engine;
  }
  if (f.schedule) {
    c.engine.schedule = d2d::schedule_from_string(*f.schedule);
    c.environment.engine.schedule = c.engine.schedule;
  }
  if (f.out) c.output_path = *f.out;
  if (f.instance) c.instance_path = *f.instance;
  if (f.corrections) c.corrections_path = *f.corrections;
  if (f.tables) c.tables_path = *f.tables;
  if (f.estimator) c.estimator = d2d::estimator_from_string(*f.estimator);
  if (f.scope) c.ic_scope = d2d::ic_scope_from_string(*f.scope);
  if (f.rounds) c.rounds = *f.rounds;
  if (c.output_path.empty()) throw d2d::ConfigError("missing output path (--out)");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed double auction simulator for D2D resource trading"};
  app.require_subcommand(1);
  Flags flags;

  auto* run = app.add_subcommand("run-auction", "one market round: allocate, price, write results");
  add_common(run, flags);
  run->add_option("--instance", flags.instance, "instance JSON instead of a generated market");
  run->add_option("--corrections", flags.corrections, "correction table JSON (default all zero)");

  auto* eff = app.add_subcommand("efficiency-sweep", "greedy vs optimal welfare over communication ranges");
  add_common(eff, flags);

  auto* sw = app.add_subcommand("switching-cost", "new matched pairs per round under churn");
  add_common(sw, flags);
  sw->add_option("--rounds", flags.rounds, "rounds per trajectory");

  auto* freq = app.add_subcommand("frequency-sweep", "time-average welfare versus trading interval");
  add_common(freq, flags);

  auto* cal = app.add_subcommand("calibrate", "expected tables, correction payments and IC report");
  add_common(cal, flags);
  cal->add_option("--estimator", flags.estimator, "montecarlo|exact");
  cal->add_option("--scope", flags.scope, "adjacent|full");

  auto* ic = app.add_subcommand("check-ic", "check a correction table against expected tables");
  add_common(ic, flags);
  ic->add_option("--tables", flags.tables, "tables JSON written by calibrate");
  ic->add_option("--corrections", flags.corrections, "corrections JSON written by calibrate");
  ic->add_option("--scope", flags.scope, "adjacent|full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    const auto config = resolve(experiment, flags);
    return d2d::run_experiment(config, std::cout);
  } catch (const d2d::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const d2d::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitViolation;
  }
}
