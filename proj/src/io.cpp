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

#include "miasched/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace miasched {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) { throw ScenarioError(message); }

const json& require(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) fail(std::string("config: missing key '") + key + "'");
  return *it;
}

double as_number(const json& node, const std::string& where) {
  if (!node.is_number()) fail("config: " + where + " must be a number");
  return node.get<double>();
}

std::vector<double> as_number_array(const json& node, const std::string& where) {
  if (!node.is_array()) fail("config: " + where + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& item : node) out.push_back(as_number(item, where + " entry"));
  return out;
}

int as_integer(const json& node, const std::string& where) {
  if (!node.is_number_integer()) fail("config: " + where + " must be an integer");
  return node.get<int>();
}

bool can_generate_rates(const Scenario& s) {
  if (!s.config.noise_psd || !(*s.config.noise_psd > 0.0) ||
      !std::isfinite(*s.config.noise_psd)) {
    return false;
  }
  for (double p : s.model.menu.levels) {
    if (!std::isfinite(p) || p <= 0.0) return false;
  }
  for (double g : s.model.channel.gains) {
    if (!std::isfinite(g) || g <= 0.0) return false;
  }
  return !s.model.menu.levels.empty() && !s.model.channel.gains.empty();
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("config: top level must be a JSON object");

  static const char* known_keys[] = {"power_menu", "channel",        "rate_table",
                                     "noise_psd",  "packet_lengths", "beta",
                                     "v",          "horizon_frames", "seed"};
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* k : known_keys) {
      if (key == k) known = true;
    }
    if (!known) fail("config: unknown key '" + key + "'");
  }

  Scenario s;
  s.model.menu.levels = as_number_array(require(doc, "power_menu"), "power_menu");

  const json& channel = require(doc, "channel");
  if (!channel.is_object()) fail("config: channel must be an object");
  s.model.channel.gains = as_number_array(require(channel, "gains"), "channel.gains");
  s.model.channel.probs = as_number_array(require(channel, "probs"), "channel.probs");

  const json& lengths = require(doc, "packet_lengths");
  if (!lengths.is_object()) fail("config: packet_lengths must be an object");
  const json& values = require(lengths, "values");
  if (!values.is_array()) fail("config: packet_lengths.values must be an array");
  for (const auto& item : values) {
    s.model.lengths.lengths.push_back(as_integer(item, "packet_lengths.values entry"));
  }
  s.model.lengths.probs = as_number_array(require(lengths, "probs"), "packet_lengths.probs");

  s.config.beta = as_number(require(doc, "beta"), "beta");
  s.config.v = as_number(require(doc, "v"), "v");
  const json& horizon = require(doc, "horizon_frames");
  if (!horizon.is_number_integer() ||
      (horizon.is_number_integer() && !horizon.is_number_unsigned() &&
       horizon.get<std::int64_t>() < 0)) {
    fail("config: horizon_frames must be a nonnegative integer");
  }
  s.config.horizon_frames = horizon.get<std::uint64_t>();
  const json& seed = require(doc, "seed");
  if (!seed.is_number_integer()) fail("config: seed must be an integer");
  s.config.seed = seed.is_number_unsigned()
                      ? seed.get<std::uint64_t>()
                      : static_cast<std::uint64_t>(seed.get<std::int64_t>());

  if (doc.contains("noise_psd")) {
    s.config.noise_psd = as_number(doc["noise_psd"], "noise_psd");
  }

  if (doc.contains("rate_table")) {
    if (s.config.noise_psd) {
      fail("config: give either rate_table or noise_psd, not both");
    }
    const json& table = doc["rate_table"];
    if (!table.is_array()) fail("config: rate_table must be an array of integer rows");
    for (const auto& row : table) {
      if (!row.is_array()) fail("config: rate_table rows must be arrays");
      std::vector<int> r;
      for (const auto& cell : row) r.push_back(as_integer(cell, "rate_table entry"));
      s.model.rates.k.push_back(std::move(r));
    }
  } else {
    if (!s.config.noise_psd) {
      fail("config: either rate_table or noise_psd is required");
    }
    if (can_generate_rates(s)) {
      s.model.rates = build_rate_table(s.model.channel, s.model.menu, *s.config.noise_psd);
    }
    // Otherwise leave the table empty; validate_model reports the root cause.
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail("short write: " + path);
}

Scenario load_scenario(const std::string& path) {
  return parse_scenario(read_file(path));
}

std::string canonical_json(const Scenario& s) {
  json doc;
  doc["power_menu"] = s.model.menu.levels;
  doc["channel"]["gains"] = s.model.channel.gains;
  doc["channel"]["probs"] = s.model.channel.probs;
  doc["rate_table"] = s.model.rates.k;
  doc["packet_lengths"]["values"] = s.model.lengths.lengths;
  doc["packet_lengths"]["probs"] = s.model.lengths.probs;
  doc["beta"] = s.config.beta;
  doc["v"] = s.config.v;
  doc["horizon_frames"] = s.config.horizon_frames;
  doc["seed"] = s.config.seed;
  if (s.config.noise_psd) doc["noise_psd"] = *s.config.noise_psd;
  return doc.dump();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t scenario_fingerprint(const Scenario& scenario) {
  return fnv1a64(canonical_json(scenario));
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_frames_csv(const std::string& path, const Trace& trace) {
  std::ostringstream out;
  out << "f,L,T,power_sum,surplus,q_before,q_after,mode\n";
  for (const FrameRecord& rec : trace.frames) {
    out << rec.frame_index << ',' << rec.packet_length << ',' << rec.num_slots << ','
        << format_double(rec.power_sum) << ',' << format_double(rec.surplus) << ','
        << format_double(rec.q_before) << ',' << format_double(rec.q_after) << ','
        << static_cast<int>(rec.mode) << '\n';
  }
  write_file(path, out.str());
}

void write_slots_csv(const std::string& path, const Trace& trace) {
  std::ostringstream out;
  out << "t,f,power_index,gain_index,delivered_units\n";
  for (const FrameRecord& rec : trace.frames) {
    for (std::uint32_t i = 0; i < rec.num_slots; ++i) {
      out << rec.start_slot + i << ',' << rec.frame_index << ','
          << rec.power_index[i] + 1 << ',' << rec.gain_index[i] + 1 << ','
          << rec.delivered_units[i] << '\n';
    }
  }
  write_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  std::size_t pos = 0;
  double x = 0.0;
  bool ok = true;
  try {
    x = std::stod(s, &pos);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok || pos != s.size()) fail("malformed number in " + where + ": '" + s + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& s, const std::string& where) {
  std::size_t pos = 0;
  std::uint64_t x = 0;
  bool ok = !s.empty() && s.front() != '-';
  if (ok) {
    try {
      x = std::stoull(s, &pos);
    } catch (const std::exception&) {
      ok = false;
    }
  }
  if (!ok || pos != s.size()) fail("malformed integer in " + where + ": '" + s + "'");
  return x;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path,
                                                    const std::string& expected_header) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != expected_header) {
    fail("unexpected CSV header in " + path);
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

}  // namespace

Trace read_trace_csv(const std::string& frames_path, const std::string& slots_path) {
  Trace trace;
  const auto frame_rows =
      read_csv_rows(frames_path, "f,L,T,power_sum,surplus,q_before,q_after,mode");
  trace.frames.reserve(frame_rows.size());
  for (const auto& row : frame_rows) {
    if (row.size() != 8) fail("frames.csv: wrong column count");
    FrameRecord rec;
    rec.frame_index = parse_u64(row[0], "frames.csv f");
    rec.packet_length = static_cast<int>(parse_u64(row[1], "frames.csv L"));
    rec.num_slots = static_cast<std::uint32_t>(parse_u64(row[2], "frames.csv T"));
    rec.power_sum = parse_double(row[3], "frames.csv power_sum");
    rec.surplus = parse_double(row[4], "frames.csv surplus");
    rec.q_before = parse_double(row[5], "frames.csv q_before");
    rec.q_after = parse_double(row[6], "frames.csv q_after");
    const std::uint64_t mode = parse_u64(row[7], "frames.csv mode");
    if (mode != 1 && mode != 2) fail("frames.csv: mode must be 1 or 2");
    rec.mode = static_cast<CaseMode>(mode);
    trace.frames.push_back(std::move(rec));
  }

  const auto slot_rows =
      read_csv_rows(slots_path, "t,f,power_index,gain_index,delivered_units");
  for (const auto& row : slot_rows) {
    if (row.size() != 5) fail("slots.csv: wrong column count");
    const std::uint64_t t = parse_u64(row[0], "slots.csv t");
    const std::uint64_t f = parse_u64(row[1], "slots.csv f");
    if (f >= trace.frames.size()) fail("slots.csv: frame index out of range");
    FrameRecord& rec = trace.frames[f];
    if (rec.power_index.empty()) rec.start_slot = t;
    const std::uint64_t power = parse_u64(row[2], "slots.csv power_index");
    const std::uint64_t gain = parse_u64(row[3], "slots.csv gain_index");
    if (power < 1 || gain < 1) fail("slots.csv: indices are 1-based");
    rec.power_index.push_back(static_cast<std::uint16_t>(power - 1));
    rec.gain_index.push_back(static_cast<std::uint16_t>(gain - 1));
    rec.delivered_units.push_back(static_cast<int>(parse_u64(row[4], "slots.csv delivered_units")));
  }
  for (const FrameRecord& rec : trace.frames) {
    if (rec.power_index.size() != rec.num_slots) {
      fail("slots.csv: slot count disagrees with frames.csv T");
    }
  }
  return trace;
}

void write_metrics_json(const std::string& path, const Metrics& m) {
  json doc;
  doc["avg_delay"] = m.avg_delay;
  doc["avg_power_per_slot"] = m.avg_power_per_slot;
  doc["constraint_slack"] = m.constraint_slack;
  doc["per_frame_surplus_mean"] = m.per_frame_surplus_mean;
  doc["q_max"] = m.q_max;
  doc["drift_penalty_mean"] = m.drift_penalty_mean;
  doc["c0_bound"] = m.c0_bound;
  doc["total_frames"] = m.total_frames;
  doc["total_slots"] = m.total_slots;
  write_file(path, doc.dump(2) + "\n");
}

void write_value_table_csv(std::ostream& out, const ValueTable& table) {
  out << "# case=" << static_cast<int>(table.mode) << "\n";
  out << "k,m_k,choice_k\n";
  if (table.mode == CaseMode::kCase1) return;
  for (int k = 1; k <= table.length; ++k) {
    out << k << ',' << format_double(table.values[k]) << ',' << table.choice[k] + 1
        << '\n';
  }
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     std::optional<double> theta_star) {
  std::ostringstream out;
  out << "v,mean_delay,se_delay,mean_slack,q_max";
  if (theta_star) out << ",theta_star,gap_times_v";
  out << '\n';
  for (const SweepRow& row : rows) {
    out << format_double(row.v) << ',' << format_double(row.mean_delay) << ','
        << format_double(row.se_delay) << ',' << format_double(row.mean_slack) << ','
        << format_double(row.q_max);
    if (theta_star) {
      const double gap = row.mean_delay - *theta_star;
      out << ',' << format_double(*theta_star) << ',' << format_double(gap * row.v);
    }
    out << '\n';
  }
  write_file(path, out.str());
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail("sweep.csv: empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "v" || header[1] != "mean_delay" ||
      header[2] != "se_delay" || header[3] != "mean_slack" || header[4] != "q_max") {
    fail("sweep.csv: unexpected header in " + path);
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 5) fail("sweep.csv: wrong column count");
    SweepRow row;
    row.v = parse_double(fields[0], "sweep.csv v");
    row.mean_delay = parse_double(fields[1], "sweep.csv mean_delay");
    row.se_delay = parse_double(fields[2], "sweep.csv se_delay");
    row.mean_slack = parse_double(fields[3], "sweep.csv mean_slack");
    row.q_max = parse_double(fields[4], "sweep.csv q_max");
    rows.push_back(row);
  }
  return rows;
}

void write_oracle_json(const std::string& path, const ThetaStarResult& result) {
  json doc;
  doc["theta_star"] = result.theta;
  doc["expected_surplus"] = result.expected_surplus;
  json support = json::array();
  for (const SupportAtom& atom : result.support) {
    json entry;
    entry["length"] = atom.length;
    entry["weight"] = atom.weight;
    entry["expected_length"] = atom.expected_length;
    entry["expected_surplus"] = atom.expected_surplus;
    json policy = json::array();
    for (std::uint8_t j : atom.policy.option) policy.push_back(j + 1);
    entry["policy"] = policy;
    support.push_back(entry);
  }
  doc["support"] = support;
  json per_length = json::array();
  for (const OracleFrontier& fr : result.frontiers) {
    json entry;
    entry["length"] = fr.length;
    entry["policy_count"] = fr.policy_count;
    entry["envelope_size"] = fr.envelope.size();
    per_length.push_back(entry);
  }
  doc["frontiers"] = per_length;
  write_file(path, doc.dump(2) + "\n");
}

double read_theta_star_json(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(std::string("oracle.json is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("theta_star") || !doc["theta_star"].is_number()) {
    fail("oracle.json: missing numeric theta_star");
  }
  return doc["theta_star"].get<double>();
}

void write_frontier_csv(const std::string& path,
                        const std::vector<OracleFrontier>& frontiers) {
  std::ostringstream out;
  out << "l,expected_surplus,expected_length,policy_index\n";
  for (const OracleFrontier& fr : frontiers) {
    for (const FrontierPoint& pt : fr.envelope) {
      out << fr.length << ',' << format_double(pt.expected_surplus) << ','
          << format_double(pt.expected_length) << ',' << pt.policy_index << '\n';
    }
  }
  write_file(path, out.str());
}

}  // namespace miasched
