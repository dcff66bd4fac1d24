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

#include "miasched/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "miasched/errors.hpp"

namespace miasched {

double queue_update(double q, double surplus) {
  return std::max(q + surplus, 0.0);
}

double queue_bound(const LinkModel& model, const SystemConfig& config) {
  const double head = config.v / (config.beta - model.menu.lowest());
  const double cap = static_cast<double>(frame_slot_cap(model));
  return std::max(head + cap * (model.menu.highest() - config.beta), 0.0);
}

namespace {

[[noreturn]] void dump_and_throw(const FrameRecord& rec, double bound) {
  std::ostringstream os;
  os << "queue bound violated: q_after=" << rec.q_after << " > bound=" << bound
     << " at frame " << rec.frame_index << " (L=" << rec.packet_length
     << ", T=" << rec.num_slots << ", q_before=" << rec.q_before
     << ", surplus=" << rec.surplus << ", mode=" << static_cast<int>(rec.mode)
     << ", powers=";
  for (std::size_t i = 0; i < rec.power_index.size(); ++i) {
    os << (i ? "," : "") << rec.power_index[i] + 1;
  }
  os << ")";
  throw QueueBoundViolation(os.str());
}

bool valid_length(int length, const PacketLengthDistribution& dist) {
  return std::find(dist.lengths.begin(), dist.lengths.end(), length) != dist.lengths.end();
}

}  // namespace

FrameRecord run_frame(double q, int packet_length, const LinkModel& model,
                      const SystemConfig& config, GainStream& channel_stream,
                      std::uint64_t frame_index, std::uint64_t start_slot,
                      std::span<const double> assumed_probs) {
  if (!valid_length(packet_length, model.lengths)) {
    std::ostringstream os;
    os << "run_frame: packet length " << packet_length << " not in the supported set";
    throw ContractViolation(os.str());
  }
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw ContractViolation("run_frame: queue must be finite and >= 0");
  }

  const FramePenalties pen = penalties(q, config.v, model.menu, config.beta);
  const CaseMode mode = case_split(pen);
  ValueTable table;
  if (mode == CaseMode::kCase1) {
    table = ValueTable::case1(packet_length);
  } else if (model.channel.size() == 1 && assumed_probs.empty()) {
    table = build_value_table_static(packet_length, pen, model.rates.k.front());
  } else {
    table = build_value_table_stochastic(packet_length, pen, model, assumed_probs);
  }

  FrameRecord rec;
  rec.frame_index = frame_index;
  rec.packet_length = packet_length;
  rec.start_slot = start_slot;
  rec.q_before = q;
  rec.mode = mode;

  int remaining = packet_length;
  while (remaining > 0) {
    // Decision first, channel draw second: the gain of slot t is unknown
    // until the slot's feedback arrives.
    const int j = choose_power(table, remaining);
    const std::size_t gi = channel_stream.next_gain_index();
    const int delivered = model.rates.k[gi][j];

    rec.power_index.push_back(static_cast<std::uint16_t>(j));
    rec.gain_index.push_back(static_cast<std::uint16_t>(gi));
    rec.delivered_units.push_back(delivered);
    rec.power_sum += model.menu.levels[j];
    rec.surplus += model.menu.levels[j] - config.beta;
    remaining = std::max(remaining - delivered, 0);
  }
  rec.num_slots = static_cast<std::uint32_t>(rec.power_index.size());
  rec.q_after = queue_update(q, rec.surplus);

  const std::uint64_t cap =
      (static_cast<std::uint64_t>(packet_length) + kmin(model) - 1) / kmin(model);
  if (rec.num_slots < 1 || rec.num_slots > cap) {
    std::ostringstream os;
    os << "frame length bound violated: T=" << rec.num_slots << " cap=" << cap
       << " at frame " << frame_index;
    throw QueueBoundViolation(os.str());
  }
  const double bound = queue_bound(model, config);
  if (rec.q_after > bound) dump_and_throw(rec, bound);

  return rec;
}

Trace run_horizon(const LinkModel& model, const SystemConfig& config,
                  GainStream& channel_stream, LengthStream& packet_stream,
                  std::span<const double> assumed_probs) {
  Trace trace;
  trace.frames.reserve(config.horizon_frames);
  double q = 0.0;
  std::uint64_t slot = 0;
  for (std::uint64_t f = 0; f < config.horizon_frames; ++f) {
    const int length = packet_stream.next_length();
    FrameRecord rec = run_frame(q, length, model, config, channel_stream, f, slot,
                                assumed_probs);
    q = rec.q_after;
    slot += rec.num_slots;
    trace.frames.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace miasched
