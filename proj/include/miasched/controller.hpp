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

#ifndef MIASCHED_CONTROLLER_HPP
#define MIASCHED_CONTROLLER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "miasched/errors.hpp"
#include "miasched/frame_solver.hpp"
#include "miasched/model.hpp"

namespace miasched {

// Everything that happened while one packet was in service.
struct FrameRecord {
  std::uint64_t frame_index = 0;
  int packet_length = 0;          // L, data units
  std::uint64_t start_slot = 0;
  std::uint32_t num_slots = 0;    // T
  std::vector<std::uint16_t> power_index;  // per slot, 0-based menu index
  std::vector<std::uint16_t> gain_index;   // per slot, 0-based alphabet index
  std::vector<int> delivered_units;        // per slot
  double power_sum = 0.0;   // sum of P(t) over the frame
  double surplus = 0.0;     // sum of P(t) - beta over the frame
  double q_before = 0.0;
  double q_after = 0.0;
  CaseMode mode = CaseMode::kCase2;
};

// Ordered frame history of one run plus a hash of the scenario it came from.
struct Trace {
  std::vector<FrameRecord> frames;
  std::uint64_t fingerprint = 0;
};

// max(q + surplus, 0): the backlog of power spent above budget.
double queue_update(double q, double surplus);

// Deterministic ceiling on the queue (holds on every sample path):
// max{ v/(beta - P_1) + ceil(lmax/kmin) * (P_max - beta), 0 }.
double queue_bound(const LinkModel& model, const SystemConfig& config);

// Source of per-slot channel realizations. Implementations own their
// randomness; the controller only ever asks for the next gain index, and
// only after committing the slot's power decision.
class GainStream {
 public:
  virtual ~GainStream() = default;
  virtual std::size_t next_gain_index() = 0;
};

// Source of per-frame packet lengths.
class LengthStream {
 public:
  virtual ~LengthStream() = default;
  virtual int next_length() = 0;
};

// Fixed, scripted streams (used by tests and deterministic replays).
class FixedGainStream final : public GainStream {
 public:
  explicit FixedGainStream(std::vector<std::size_t> indices)
      : indices_(std::move(indices)) {}
  std::size_t next_gain_index() override {
    if (pos_ >= indices_.size()) throw ContractViolation("FixedGainStream exhausted");
    return indices_[pos_++];
  }

 private:
  std::vector<std::size_t> indices_;
  std::size_t pos_ = 0;
};

class FixedLengthStream final : public LengthStream {
 public:
  explicit FixedLengthStream(std::vector<int> lengths) : lengths_(std::move(lengths)) {}
  int next_length() override {
    if (pos_ >= lengths_.size()) throw ContractViolation("FixedLengthStream exhausted");
    return lengths_[pos_++];
  }

 private:
  std::vector<int> lengths_;
  std::size_t pos_ = 0;
};

// Serves one packet: builds the frame's penalties and (in Case 2) its value
// table once, then allocates power slot by slot until the packet's data units
// are delivered. The slot decision never looks at the slot's own gain draw.
// Ends with the queue update and the deterministic queue-bound check.
// `assumed_probs` optionally feeds the table a wrong channel distribution.
FrameRecord run_frame(double q, int packet_length, const LinkModel& model,
                      const SystemConfig& config, GainStream& channel_stream,
                      std::uint64_t frame_index = 0, std::uint64_t start_slot = 0,
                      std::span<const double> assumed_probs = {});

// Runs config.horizon_frames frames, drawing packet lengths from
// `packet_stream` and threading the queue from frame to frame. Q[0] = 0.
Trace run_horizon(const LinkModel& model, const SystemConfig& config,
                  GainStream& channel_stream, LengthStream& packet_stream,
                  std::span<const double> assumed_probs = {});

}  // namespace miasched

#endif  // MIASCHED_CONTROLLER_HPP
