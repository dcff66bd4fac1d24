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

#ifndef MIASCHED_SIMULATOR_HPP
#define MIASCHED_SIMULATOR_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "miasched/controller.hpp"
#include "miasched/model.hpp"
#include "miasched/rng.hpp"

namespace miasched {

// Channel realizations drawn from the model's gain distribution through a
// counter-based stream: slot draws replay bit-exactly from (seed, label).
class PhiloxGainStream final : public GainStream {
 public:
  PhiloxGainStream(std::uint64_t seed, const ChannelDistribution& dist)
      : stream_(seed, kChannelStream), dist_(&dist) {}
  std::size_t next_gain_index() override { return stream_.next_index(dist_->probs); }

 private:
  RandomStream stream_;
  const ChannelDistribution* dist_;
};

class PhiloxLengthStream final : public LengthStream {
 public:
  PhiloxLengthStream(std::uint64_t seed, const PacketLengthDistribution& dist)
      : stream_(seed, kPacketStream), dist_(&dist) {}
  int next_length() override { return dist_->lengths[stream_.next_index(dist_->probs)]; }

 private:
  RandomStream stream_;
  const PacketLengthDistribution* dist_;
};

// Runs the controller over the configured horizon with streams derived from
// config.seed, and stamps the trace with the scenario fingerprint.
// `assumed_probs` optionally mis-informs the per-frame tables.
Trace simulate(const LinkModel& model, const SystemConfig& config,
               std::span<const double> assumed_probs = {});

// Summary statistics of one trace.
struct Metrics {
  double avg_delay = 0.0;              // (sum T) / F, slots per packet
  double avg_power_per_slot = 0.0;     // (sum of all P(t)) / (sum T)
  double constraint_slack = 0.0;       // avg_power_per_slot - beta
  double per_frame_surplus_mean = 0.0; // (1/F) sum of frame surpluses
  double q_max = 0.0;
  double drift_penalty_mean = 0.0;     // (1/F) sum of (drift + v * T)
  double c0_bound = 0.0;               // 0.5 * (ceil(lmax/kmin) * (P_max + beta))^2
  std::uint64_t total_frames = 0;
  std::uint64_t total_slots = 0;
};

double c0_bound(const LinkModel& model, const SystemConfig& config);

// Throws ContractViolation on an empty trace.
Metrics compute_metrics(const Trace& trace, const LinkModel& model,
                        const SystemConfig& config);

// One simulated cell of a V sweep.
struct SweepCell {
  double v = 0.0;
  int repetition = 0;
  std::uint64_t seed = 0;  // derived from the base seed, v index and rep
  Metrics metrics;
};

// Per-V aggregate over repetitions.
struct SweepRow {
  double v = 0.0;
  double mean_delay = 0.0;
  double se_delay = 0.0;  // standard error over repetitions (0 when reps == 1)
  double mean_slack = 0.0;
  double q_max = 0.0;
};

// Runs repetitions x v_values independent simulations. Cells derive their
// own seeds, so results do not depend on scheduling or thread count.
std::vector<SweepCell> sweep_cells(const LinkModel& model, const SystemConfig& base,
                                   std::span<const double> v_values, int repetitions,
                                   bool parallel = true);

std::vector<SweepRow> aggregate_sweep(std::span<const SweepCell> cells,
                                      std::span<const double> v_values,
                                      int repetitions);

std::vector<SweepRow> sweep_v(const LinkModel& model, const SystemConfig& base,
                              std::span<const double> v_values, int repetitions,
                              bool parallel = true);

}  // namespace miasched

#endif  // MIASCHED_SIMULATOR_HPP
