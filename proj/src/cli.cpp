// Copyright 2026 the miasched authors
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

#include "miasched/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "miasched/io.hpp"
#include "miasched/oracle.hpp"
#include "miasched/simulator.hpp"

namespace miasched {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ValidationFailed : std::runtime_error {
  explicit ValidationFailed(std::vector<Violation> v)
      : std::runtime_error("model validation failed"), violations(std::move(v)) {}
  std::vector<Violation> violations;
};

struct LoadedScenario {
  Scenario scenario;
  std::string config_path;
  std::string raw_bytes;
};

LoadedScenario load_validated(const std::string& path,
                              std::optional<std::uint64_t> seed_override) {
  LoadedScenario loaded;
  loaded.config_path = path;
  loaded.raw_bytes = read_file(path);
  loaded.scenario = parse_scenario(loaded.raw_bytes);
  if (seed_override) loaded.scenario.config.seed = *seed_override;
  auto violations = validate_model(loaded.scenario.model, loaded.scenario.config);
  if (!violations.empty()) throw ValidationFailed(std::move(violations));
  renormalize(loaded.scenario.model);
  return loaded;
}

std::string hex64(std::uint64_t x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

// The manifest goes to disk before any other artifact of the run.
void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const LoadedScenario& loaded) {
  json doc;
  doc["tool_version"] = kToolVersion;
  doc["subcommand"] = subcommand;
  doc["config_path"] = loaded.config_path;
  doc["config_fnv1a64"] = hex64(fnv1a64(loaded.raw_bytes));
  doc["model_fingerprint"] = hex64(scenario_fingerprint(loaded.scenario));
  doc["seed"] = loaded.scenario.config.seed;
  doc["out_dir"] = out_dir;
  write_file((fs::path(out_dir) / "manifest.json").string(), doc.dump(2) + "\n");
}

std::string join_path(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

int cmd_validate(const std::string& config_path) {
  const Scenario s = load_scenario(config_path);
  const auto violations = validate_model(s.model, s.config);
  if (!violations.empty()) {
    for (const Violation& v : violations) {
      std::cerr << v.id << ": " << v.message << "\n";
    }
    return 1;
  }
  std::cout << "ok\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir) {
  LoadedScenario loaded = load_validated(config_path, seed);
  fs::create_directories(out_dir);
  write_manifest(out_dir, "simulate", loaded);
  const Trace trace = simulate(loaded.scenario.model, loaded.scenario.config);
  write_frames_csv(join_path(out_dir, "frames.csv"), trace);
  write_slots_csv(join_path(out_dir, "slots.csv"), trace);
  const Metrics metrics =
      compute_metrics(trace, loaded.scenario.model, loaded.scenario.config);
  write_metrics_json(join_path(out_dir, "metrics.json"), metrics);
  return 0;
}

int cmd_frame_solve(const std::string& config_path, double q, int length,
                    const std::string& out_path) {
  LoadedScenario loaded = load_validated(config_path, std::nullopt);
  if (length < 1) throw ScenarioError("frame-solve: --l must be >= 1");
  if (q < 0.0) throw ScenarioError("frame-solve: --q must be >= 0");
  const LinkModel& model = loaded.scenario.model;
  const SystemConfig& config = loaded.scenario.config;
  const FramePenalties pen = penalties(q, config.v, model.menu, config.beta);
  ValueTable table;
  if (case_split(pen) == CaseMode::kCase1) {
    table = ValueTable::case1(length);
  } else if (model.channel.size() == 1) {
    table = build_value_table_static(length, pen, model.rates.k.front());
  } else {
    table = build_value_table_stochastic(length, pen, model);
  }
  if (out_path.empty()) {
    write_value_table_csv(std::cout, table);
  } else {
    std::ostringstream buf;
    write_value_table_csv(buf, table);
    write_file(out_path, buf.str());
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir, const std::vector<double>& v_values,
              int repetitions, bool with_oracle, bool serial) {
  LoadedScenario loaded = load_validated(config_path, seed);
  if (v_values.empty()) throw ScenarioError("sweep: --v needs at least one value");
  if (repetitions < 1) throw ScenarioError("sweep: --reps must be >= 1");
  fs::create_directories(out_dir);
  write_manifest(out_dir, "sweep", loaded);
  const auto rows = sweep_v(loaded.scenario.model, loaded.scenario.config, v_values,
                            repetitions, !serial);
  std::optional<double> theta;
  if (with_oracle) {
    theta = theta_star(loaded.scenario.model, loaded.scenario.config.beta, !serial).theta;
  }
  write_sweep_csv(join_path(out_dir, "sweep.csv"), rows, theta);
  return 0;
}

int cmd_oracle(const std::string& config_path, const std::string& out_dir, bool serial) {
  LoadedScenario loaded = load_validated(config_path, std::nullopt);
  fs::create_directories(out_dir);
  write_manifest(out_dir, "oracle", loaded);
  const ThetaStarResult result =
      theta_star(loaded.scenario.model, loaded.scenario.config.beta, !serial);
  write_oracle_json(join_path(out_dir, "oracle.json"), result);
  write_frontier_csv(join_path(out_dir, "frontier.csv"), result.frontiers);
  std::cout << "theta_star=" << format_double(result.theta) << "\n";
  return 0;
}

int cmd_verify_dp(const std::string& config_path, double q, int length,
                  std::optional<double> v, bool serial) {
  LoadedScenario loaded = load_validated(config_path, std::nullopt);
  const double weight = v ? *v : loaded.scenario.config.v;
  const VerifyDpResult result =
      verify_dp(loaded.scenario.model, length, q, weight,
                loaded.scenario.config.beta, !serial);
  std::cout << (result.match ? "PASS" : "FAIL") << " dp=" << format_double(result.dp_value)
            << " oracle=" << format_double(result.oracle_value)
            << " policies=" << result.policy_count << "\n";
  return result.match ? 0 : 1;
}

int cmd_compare(const std::string& sweep_path, const std::string& oracle_path,
                const std::string& out_path) {
  const auto rows = read_sweep_csv(sweep_path);
  const double theta = read_theta_star_json(oracle_path);
  std::ostringstream out;
  out << "v,delay_gap,gap_times_v\n";
  for (const SweepRow& row : rows) {
    const double gap = row.mean_delay - theta;
    out << format_double(row.v) << ',' << format_double(gap) << ','
        << format_double(gap * row.v) << '\n';
  }
  if (out_path.empty()) {
    std::cout << out.str();
  } else {
    write_file(out_path, out.str());
  }
  return 0;
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
  CLI::App app{"slotted-time wireless link simulator with drift-plus-penalty scheduling"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> v_override;
  std::vector<double> v_values;
  double q = 0.0;
  int length = 1;
  int repetitions = 1;
  bool with_oracle = false;
  bool serial = false;
  std::string sweep_path;
  std::string oracle_path;

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("--config", config_path, "scenario JSON")->required();

  auto* simulate_cmd = app.add_subcommand("simulate", "run one seeded horizon");
  simulate_cmd->add_option("--config", config_path, "scenario JSON")->required();
  simulate_cmd->add_option("--out", out_dir, "output directory")->required();
  simulate_cmd->add_option("--seed", seed, "override the config seed");

  auto* frame_solve = app.add_subcommand("frame-solve", "print one frame's value table");
  frame_solve->add_option("--config", config_path, "scenario JSON")->required();
  frame_solve->add_option("--q", q, "virtual queue value")->required();
  frame_solve->add_option("--l", length, "packet length, data units")->required();
  frame_solve->add_option("--out", out_path, "output CSV (default: stdout)");

  auto* sweep = app.add_subcommand("sweep", "simulate a grid of V values");
  sweep->add_option("--config", config_path, "scenario JSON")->required();
  sweep->add_option("--v", v_values, "comma-separated V values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--reps", repetitions, "repetitions per V");
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--seed", seed, "override the config seed");
  sweep->add_flag("--oracle", with_oracle, "also compute theta_star columns");
  sweep->add_flag("--serial", serial, "disable multithreading");

  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force theta_star and frontiers");
  oracle_cmd->add_option("--config", config_path, "scenario JSON")->required();
  oracle_cmd->add_option("--out", out_dir, "output directory")->required();
  oracle_cmd->add_flag("--serial", serial, "disable multithreading");

  auto* verify = app.add_subcommand("verify-dp", "check the frame DP against enumeration");
  verify->add_option("--config", config_path, "scenario JSON")->required();
  verify->add_option("--q", q, "virtual queue value")->required();
  verify->add_option("--l", length, "packet length, data units")->required();
  verify->add_option("--v", v_override, "override the config V");
  verify->add_flag("--serial", serial, "disable multithreading");

  auto* compare = app.add_subcommand("compare", "join sweep.csv with oracle.json");
  compare->add_option("--sweep", sweep_path, "sweep.csv path")->required();
  compare->add_option("--oracle", oracle_path, "oracle.json path")->required();
  compare->add_option("--out", out_path, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (simulate_cmd->parsed()) return cmd_simulate(config_path, seed, out_dir);
    if (frame_solve->parsed()) return cmd_frame_solve(config_path, q, length, out_path);
    if (sweep->parsed()) {
      return cmd_sweep(config_path, seed, out_dir, v_values, repetitions, with_oracle,
                       serial);
    }
    if (oracle_cmd->parsed()) return cmd_oracle(config_path, out_dir, serial);
    if (verify->parsed()) return cmd_verify_dp(config_path, q, length, v_override, serial);
    if (compare->parsed()) return cmd_compare(sweep_path, oracle_path, out_path);
  } catch (const ValidationFailed& e) {
    for (const Violation& v : e.violations) {
      std::cerr << v.id << ": " << v.message << "\n";
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace miasched
