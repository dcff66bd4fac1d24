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

#ifndef MIASCHED_IO_HPP
#define MIASCHED_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "miasched/controller.hpp"
#include "miasched/errors.hpp"
#include "miasched/frame_solver.hpp"
#include "miasched/model.hpp"
#include "miasched/oracle.hpp"
#include "miasched/simulator.hpp"

namespace miasched {

// The one JSON document everything runs from: link model plus run config.
struct Scenario {
  LinkModel model;
  SystemConfig config;
};

// Parses the scenario document. Shape/type problems throw ScenarioError;
// semantic violations are left for validate_model. When `rate_table` is
// absent the table is generated from `noise_psd` via the rate formula.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

// Canonical re-serialization (sorted keys, round-trip floats); two scenarios
// with the same content always produce identical bytes.
std::string canonical_json(const Scenario& scenario);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t scenario_fingerprint(const Scenario& scenario);

// Doubles in CSV output: 17 significant digits, '.' separator, no grouping.
std::string format_double(double x);

// frames.csv: f,L,T,power_sum,surplus,q_before,q_after,mode
// slots.csv:  t,f,power_index,gain_index,delivered_units
// Option and gain indices are written 1-based.
void write_frames_csv(const std::string& path, const Trace& trace);
void write_slots_csv(const std::string& path, const Trace& trace);

// Exact inverse of the two writers (indices and 17-digit floats round-trip).
Trace read_trace_csv(const std::string& frames_path, const std::string& slots_path);

void write_metrics_json(const std::string& path, const Metrics& metrics);

// Value-table CSV for one frame: a comment line with the case split, then
// k,m_k,choice_k rows (none in Case 1, where the policy is option 1 always).
void write_value_table_csv(std::ostream& out, const ValueTable& table);

// sweep.csv: v,mean_delay,se_delay,mean_slack,q_max and, when theta_star is
// supplied, theta_star,gap_times_v.
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     std::optional<double> theta_star);
std::vector<SweepRow> read_sweep_csv(const std::string& path);

void write_oracle_json(const std::string& path, const ThetaStarResult& result);
double read_theta_star_json(const std::string& path);

// frontier.csv: one row per envelope vertex: l,expected_surplus,
// expected_length,policy_index.
void write_frontier_csv(const std::string& path,
                        const std::vector<OracleFrontier>& frontiers);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace miasched

#endif  // MIASCHED_IO_HPP
