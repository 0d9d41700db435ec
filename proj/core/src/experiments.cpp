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

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "d2d/error.hpp"
#include "d2d/pricing.hpp"
#include "d2d/random.hpp"
#include "d2d/version.hpp"

namespace d2d {

namespace {

constexpr std::uint64_t kEfficiencyStream = 0x65666663ULL;
constexpr std::uint64_t kSwitchingStream = 0x73776368ULL;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Shortest round-trip representation; stable across runs.
std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<int> default_intervals() {
  std::vector<int> out;
  for (int t = 1; t <= 60; ++t) out.push_back(t);
  return out;
}

std::filesystem::path output_dir(const ExperimentConfig& config) {
  if (config.output_path.empty()) throw ConfigError("missing output path (--out)");
  std::filesystem::path dir(config.output_path);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

Json with_meta(const ExperimentConfig& config, Json data) {
  return Json{{"meta", output_meta(config)}, {"data", std::move(data)}};
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    throw ConfigError("unknown experiment '" + experiment + "'");
  market.validate();
  dynamics.validate();
  if (samples == 0) throw ConfigError("samples must be > 0");
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  for (double l : comm_ranges)
    if (!(l >= 0.0)) throw ConfigError("comm_ranges must be >= 0");
  for (double r : densities)
    if (!(r >= 0.0)) throw ConfigError("densities must be >= 0");
  for (int t : intervals)
    if (t < 1) throw ConfigError("intervals must be >= 1");
  if (experiment == "calibrate") environment.validate();
  if (experiment == "check-ic" && (tables_path.empty() || corrections_path.empty()))
    throw ConfigError("check-ic needs tables_path and corrections_path");
  if (!(rounds_per_period > 0.0)) throw ConfigError("rounds_per_period must be > 0");
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"run-auction",    "efficiency-sweep", "switching-cost",
                                              "frequency-sweep", "calibrate",       "check-ic"};
  return names;
}

Json to_json(const ExperimentConfig& c) {
  Json engines = Json::array();
  for (auto e : c.engines) engines.push_back(to_string(e));
  return Json{{"experiment", c.experiment},
              {"market", to_json(c.market)},
              {"dynamics", to_json(c.dynamics)},
              {"engine", to_json(c.engine)},
              {"samples", c.samples},
              {"seed", c.seed},
              {"output_path", c.output_path},
              {"comm_ranges", c.comm_ranges},
              {"densities", c.densities},
              {"engines", engines},
              {"rounds", c.rounds},
              {"intervals", c.intervals.empty() ? default_intervals() : c.intervals},
              {"retrade_probabilities", c.retrade_probabilities},
              {"departure_rates", c.departure_rates},
              {"environment", to_json(c.environment)},
              {"estimator", to_string(c.estimator)},
              {"isotonize", c.isotonize},
              {"ic_scope", to_string(c.ic_scope)},
              {"rounds_per_period", c.rounds_per_period},
              {"instance_path", c.instance_path},
              {"corrections_path", c.corrections_path},
              {"tables_path", c.tables_path}};
}

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  auto get = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    try {
      out = j.at(key).get<std::remove_reference_t<decltype(out)>>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config.") + key + ": " + e.what());
    }
  };
  for (const auto& [key, value] : j.items()) {
    static const std::vector<std::string> known{
        "experiment", "market",    "dynamics",   "engine",   "samples",     "seed",
        "output_path", "comm_ranges", "densities", "engines",  "rounds",      "intervals",
        "retrade_probabilities", "departure_rates", "environment", "estimator", "isotonize", "ic_scope",
        "rounds_per_period", "instance_path", "corrections_path", "tables_path"};
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("config: unknown key '" + key + "'");
  }
  get("experiment", c.experiment);
  if (j.contains("market")) c.market = market_config_from_json(j.at("market"), c.market);
  if (j.contains("dynamics")) c.dynamics = dynamics_config_from_json(j.at("dynamics"), c.dynamics);
  if (j.contains("engine")) c.engine = engine_spec_from_json(j.at("engine"), c.engine);
  get("samples", c.samples);
  get("seed", c.seed);
  get("output_path", c.output_path);
  get("comm_ranges", c.comm_ranges);
  get("densities", c.densities);
  if (j.contains("engines")) {
    c.engines.clear();
    for (const auto& e : j.at("engines")) c.engines.push_back(engine_from_string(e.get<std::string>()));
  }
  get("rounds", c.rounds);
  get("intervals", c.intervals);
  get("retrade_probabilities", c.retrade_probabilities);
  get("departure_rates", c.departure_rates);
  if (j.contains("environment")) c.environment = environment_from_json(j.at("environment"), c.environment);
  if (j.contains("estimator")) c.estimator = estimator_from_string(j.at("estimator").get<std::string>());
  get("isotonize", c.isotonize);
  if (j.contains("ic_scope")) c.ic_scope = ic_scope_from_string(j.at("ic_scope").get<std::string>());
  get("rounds_per_period", c.rounds_per_period);
  get("instance_path", c.instance_path);
  get("corrections_path", c.corrections_path);
  get("tables_path", c.tables_path);
  return c;
}

namespace {

// The output directory is left out so reruns into different directories
// produce identical files.
Json config_echo(const ExperimentConfig& config) {
  auto j = to_json(config);
  j.erase("output_path");
  return j;
}

}  // namespace

Json output_meta(const ExperimentConfig& config) {
  return Json{{"version", kVersionString},
              {"rng", std::string(Rng::kName)},
              {"seed", config.seed},
              {"config", config_echo(config)}};
}

std::string csv_header(const ExperimentConfig& config) {
  std::ostringstream os;
  os << "# version: " << kVersionString << "\n"
     << "# rng: " << Rng::kName << "\n"
     << "# seed: " << config.seed << "\n"
     << "# config: " << config_echo(config).dump() << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

std::vector<EfficiencyPoint> run_efficiency_sweep(const ExperimentConfig& config) {
  if (config.engine.engine == Engine::Optimal) throw ConfigError("efficiency-sweep compares a greedy engine to the optimum");
  std::vector<EfficiencyPoint> out;
  for (double range : config.comm_ranges) {
    MarketConfig market = config.market;
    market.comm_range = range;
    EfficiencyPoint pt;
    pt.comm_range = range;
    pt.min_ratio = 1.0;
    for (std::size_t s = 0; s < config.samples; ++s) {
      const auto instance = generate_market(market, derive_seed(config.seed, kEfficiencyStream, s));
      const auto decl = DeclarationProfile::truthful(instance);
      auto t0 = Clock::now();
      const auto greedy = allocate(instance, decl, config.engine);
      pt.greedy_ms += elapsed_ms(t0);
      t0 = Clock::now();
      const auto optimal = allocate_optimal(instance, decl);
      pt.optimal_ms += elapsed_ms(t0);
      const auto wg = social_welfare(instance, decl, greedy);
      const auto wo = social_welfare(instance, decl, optimal);
      const double ratio = wo == 0 ? 1.0 : static_cast<double>(wg) / static_cast<double>(wo);
      pt.mean_ratio += ratio;
      pt.min_ratio = std::min(pt.min_ratio, ratio);
      pt.mean_greedy_welfare += static_cast<double>(wg);
      pt.mean_optimal_welfare += static_cast<double>(wo);
    }
    const auto n = static_cast<double>(config.samples);
    pt.mean_ratio /= n;
    pt.mean_greedy_welfare /= n;
    pt.mean_optimal_welfare /= n;
    pt.greedy_ms /= n;
    pt.optimal_ms /= n;
    out.push_back(pt);
  }
  return out;
}

std::vector<SwitchingPoint> run_switching_cost(const ExperimentConfig& config,
                                               std::vector<std::vector<RoundSummary>>* trajectories) {
  std::vector<SwitchingPoint> out;
  for (double density : config.densities) {
    MarketConfig market = config.market;
    market.mean_user_count = density;
    for (Engine engine : config.engines) {
      EngineSpec spec = config.engine;
      spec.engine = engine;
      SwitchingPoint pt;
      pt.density = density;
      pt.engine = engine;
      for (std::size_t s = 0; s < config.samples; ++s) {
        auto rounds = run_rounds(market, config.dynamics, spec, config.rounds,
                                 derive_seed(config.seed, kSwitchingStream, s));
        double cost = 0.0;
        double welfare = 0.0;
        for (const auto& r : rounds) {
          if (r.round_index > 0) cost += static_cast<double>(r.switching_cost);
          welfare += static_cast<double>(r.welfare);
        }
        if (rounds.size() > 1) pt.mean_switching_cost += cost / static_cast<double>(rounds.size() - 1);
        pt.mean_welfare += welfare / static_cast<double>(rounds.size());
        if (trajectories) trajectories->push_back(std::move(rounds));
      }
      pt.mean_switching_cost /= static_cast<double>(config.samples);
      pt.mean_welfare /= static_cast<double>(config.samples);
      out.push_back(pt);
    }
  }
  return out;
}

std::vector<FrequencyPoint> run_frequency_sweep(const ExperimentConfig& config) {
  const auto intervals = config.intervals.empty() ? default_intervals() : config.intervals;
  std::vector<FrequencyPoint> out;
  for (double p : config.retrade_probabilities) {
    for (double mu : config.departure_rates) {
      for (int t : intervals) {
        DynamicsConfig d = config.dynamics;
        d.retrade_probability = p;
        d.departure_rate = mu;
        d.round_interval = t;
        FrequencyPoint pt;
        pt.retrade_probability = p;
        pt.departure_rate = mu;
        pt.interval = t;
        pt.participants = steady_state_K(d.arrival_rate, mu, p, t);
        pt.welfare = time_average_welfare(config.market, d, config.samples, config.seed);
        out.push_back(pt);
      }
    }
  }
  return out;
}

CalibrationResult calibrate(const ExperimentConfig& config) {
  EstimateOptions opts;
  opts.samples = config.samples;
  opts.seed = config.seed;
  opts.estimator = config.estimator;
  opts.isotonize = config.isotonize;
  CalibrationResult r;
  r.tables = estimate_tables(config.environment, opts);
  const auto& m = config.environment.market;
  r.violations_before = check_incentive_compatibility(r.tables, CorrectionTable::zeros(m.quantities, m.values, m.costs),
                                                      config.ic_scope);
  r.corrections = compute_corrections(r.tables);
  r.violations_after = check_incentive_compatibility(r.tables, r.corrections, config.ic_scope);
  return r;
}

// ---------------------------------------------------------------------------

int cmd_run_auction(const ExperimentConfig& config, std::ostream& log) {
  const auto dir = output_dir(config);
  const auto instance = config.instance_path.empty() ? generate_market(config.market, config.seed)
                                                     : instance_from_json(read_json_file(config.instance_path));
  for (const auto& issue : validate_instance(instance)) throw InputError("instance: " + issue);
  const auto corrections =
      config.corrections_path.empty()
          ? CorrectionTable::zeros(config.market.quantities, config.market.values, config.market.costs)
          : correction_table_from_json(read_json_file(config.corrections_path));
  const auto decl = DeclarationProfile::truthful(instance);
  const auto alloc = allocate(instance, decl, config.engine);
  const auto priced = price_round(instance, decl, alloc, corrections);
  const auto welfare = social_welfare(instance, decl, alloc);

  write_json_file(dir / "instance.json", with_meta(config, to_json(instance)));
  write_json_file(dir / "allocation.json", with_meta(config, to_json(alloc)));
  write_json_file(dir / "trades.json", with_meta(config, to_json(priced)));
  const Json summary{{"participants", instance.participant_count()},
                     {"buyers", instance.buyers().size()},
                     {"sellers", instance.sellers().size()},
                     {"edges", instance.edge_count()},
                     {"engine", alloc.engine},
                     {"iterations_used", alloc.iterations_used},
                     {"welfare", welfare},
                     {"units", alloc.total_units()},
                     {"budget_gap", priced.budget_gap},
                     {"subscription_fee", subscription_fee(priced.budget_gap, config.rounds_per_period,
                                                           static_cast<double>(instance.participant_count()))}};
  write_json_file(dir / "summary.json", with_meta(config, summary));
  log << "welfare " << welfare << " units " << alloc.total_units() << " budget_gap " << fmt(priced.budget_gap)
      << "\n";
  return 0;
}

int cmd_efficiency_sweep(const ExperimentConfig& config, std::ostream& log) {
  const auto dir = output_dir(config);
  const auto points = run_efficiency_sweep(config);
  std::ostringstream data;
  std::ostringstream timing;
  data << csv_header(config) << "comm_range,samples,mean_ratio,min_ratio,mean_greedy_welfare,mean_optimal_welfare\n";
  timing << csv_header(config) << "comm_range,samples,greedy_ms,optimal_ms,runtime_ratio\n";
  for (const auto& p : points) {
    data << fmt(p.comm_range) << "," << config.samples << "," << fmt(p.mean_ratio) << "," << fmt(p.min_ratio) << ","
         << fmt(p.mean_greedy_welfare) << "," << fmt(p.mean_optimal_welfare) << "\n";
    const double rr = p.optimal_ms > 0 ? p.greedy_ms / p.optimal_ms : 0.0;
    timing << fmt(p.comm_range) << "," << config.samples << "," << fmt(p.greedy_ms) << "," << fmt(p.optimal_ms)
           << "," << fmt(rr) << "\n";
    log << "L=" << p.comm_range << " ratio " << p.mean_ratio << " runtime_ratio " << rr << "\n";
  }
  write_text_file(dir / "efficiency.csv", data.str());
  write_text_file(dir / "efficiency.timing.csv", timing.str());
  return 0;
}

int cmd_switching_cost(const ExperimentConfig& config, std::ostream& log) {
  const auto dir = output_dir(config);
  std::vector<std::vector<RoundSummary>> trajectories;
  const auto points = run_switching_cost(config, &trajectories);
  std::ostringstream data;
  std::ostringstream rounds;
  data << csv_header(config) << "density,engine,seeds,mean_switching_cost,mean_welfare\n";
  rounds << csv_header(config) << "density,engine,seed,round,participants,welfare,switching_cost,budget_gap\n";
  std::size_t k = 0;
  for (const auto& p : points) {
    data << fmt(p.density) << "," << to_string(p.engine) << "," << config.samples << ","
         << fmt(p.mean_switching_cost) << "," << fmt(p.mean_welfare) << "\n";
    for (std::size_t s = 0; s < config.samples; ++s, ++k)
      for (const auto& r : trajectories[k])
        rounds << fmt(p.density) << "," << to_string(p.engine) << "," << s << "," << r.round_index << ","
               << r.participant_count << "," << r.welfare << "," << r.switching_cost << "," << fmt(r.budget_gap)
               << "\n";
    log << "rho=" << p.density << " " << to_string(p.engine) << " switching " << p.mean_switching_cost << "\n";
  }
  // Savings of the first engine against the optimum, per density.
  for (const auto& p : points) {
    if (p.engine != Engine::Optimal) continue;
    for (const auto& q : points)
      if (q.density == p.density && q.engine != Engine::Optimal && p.mean_switching_cost > 0)
        log << "rho=" << p.density << " " << to_string(q.engine) << " saves "
            << 100.0 * (p.mean_switching_cost - q.mean_switching_cost) / p.mean_switching_cost << "%\n";
  }
  write_text_file(dir / "switching_cost.csv", data.str());
  write_text_file(dir / "rounds.csv", rounds.str());
  return 0;
}

int cmd_frequency_sweep(const ExperimentConfig& config, std::ostream& log) {
  const auto dir = output_dir(config);
  const auto points = run_frequency_sweep(config);
  std::ostringstream data;
  data << csv_header(config) << "# participant count per sample: Poisson(K)\n"
       << "retrade_probability,departure_rate,interval,participants,welfare\n";
  for (const auto& p : points)
    data << fmt(p.retrade_probability) << "," << fmt(p.departure_rate) << "," << p.interval << ","
         << fmt(p.participants) << "," << fmt(p.welfare) << "\n";
  write_text_file(dir / "frequency.csv", data.str());
  log << points.size() << " points\n";
  return 0;
}

namespace {

Json ic_report(const ExperimentConfig& config, const std::vector<IcViolation>& violations, std::size_t before) {
  Json list = Json::array();
  for (const auto& v : violations) list.push_back(to_json(v));
  Json j{{"scope", to_string(config.ic_scope)}, {"violations", violations.size()}, {"details", list}};
  if (before != static_cast<std::size_t>(-1)) j["violations_before_calibration"] = before;
  return j;
}

}  // namespace

int cmd_calibrate(const ExperimentConfig& config, std::ostream& log) {
  const auto dir = output_dir(config);
  const auto r = calibrate(config);
  Json tables = to_json(r.tables);
  tables["provenance"]["environment"] = to_json(config.environment);
  write_json_file(dir / "tables.json", with_meta(config, tables));
  write_json_file(dir / "corrections.json", with_meta(config, to_json(r.corrections)));
  write_json_file(dir / "ic_report.json",
                  with_meta(config, ic_report(config, r.violations_after, r.violations_before.size())));
  log << "violations before " << r.violations_before.size() << " after " << r.violations_after.size() << "\n";
  if (config.estimator == Estimator::ExactEnumeration && !r.violations_after.empty()) return 1;
  return 0;
}

int cmd_check_ic(const ExperimentConfig& config, std::ostream& log) {
  const auto dir = output_dir(config);
  auto unwrap = [](Json j) { return j.contains("data") && j.contains("meta") ? j.at("data") : j; };
  const auto tables = expected_tables_from_json(unwrap(read_json_file(config.tables_path)));
  const auto corrections = correction_table_from_json(unwrap(read_json_file(config.corrections_path)));
  const auto violations = check_incentive_compatibility(tables, corrections, config.ic_scope);
  write_json_file(dir / "ic_report.json", with_meta(config, ic_report(config, violations, static_cast<std::size_t>(-1))));
  log << "violations " << violations.size() << "\n";
  return violations.empty() ? 0 : 1;
}

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const auto& e = config.experiment;
  if (e == "run-auction") return cmd_run_auction(config, log);
  if (e == "efficiency-sweep") return cmd_efficiency_sweep(config, log);
  if (e == "switching-cost") return cmd_switching_cost(config, log);
  if (e == "frequency-sweep") return cmd_frequency_sweep(config, log);
  if (e == "calibrate") return cmd_calibrate(config, log);
  return cmd_check_ic(config, log);
}

}  // namespace d2d
