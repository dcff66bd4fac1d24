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

#ifndef MIASCHED_MODEL_HPP
#define MIASCHED_MODEL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace miasched {

// Discrete transmit-power menu, joules/slot/Hz. Must be strictly increasing
// and positive; index 0 is the smallest option.
struct PowerMenu {
  std::vector<double> levels;

  std::size_t size() const { return levels.size(); }
  double lowest() const { return levels.front(); }
  double highest() const { return levels.back(); }
};

// Finite channel-gain alphabet with its per-slot distribution.
struct ChannelDistribution {
  std::vector<double> gains;
  std::vector<double> probs;

  std::size_t size() const { return gains.size(); }
};

// Data units delivered in one slot: k[i][j] for gain index i and power
// option j. Entries are positive integers, nondecreasing in both the power
// and the gain direction.
struct RateTable {
  std::vector<std::vector<int>> k;

  std::size_t num_gains() const { return k.size(); }
  std::size_t num_powers() const { return k.empty() ? 0 : k.front().size(); }
};

// Finite packet-length distribution, lengths in data units.
struct PacketLengthDistribution {
  std::vector<int> lengths;
  std::vector<double> probs;

  std::size_t size() const { return lengths.size(); }
};

struct LinkModel {
  PowerMenu menu;
  ChannelDistribution channel;
  RateTable rates;
  PacketLengthDistribution lengths;
};

struct SystemConfig {
  double beta = 0.0;                 // average power budget, joules/slot/Hz
  double v = 0.0;                    // delay/constraint trade-off weight
  std::uint64_t horizon_frames = 0;  // F
  std::uint64_t seed = 0;
  std::optional<double> noise_psd;   // only used to generate a rate table
};

// One violated invariant. `id` is stable and machine-checkable; `message`
// is for humans.
struct Violation {
  std::string id;
  std::string message;
};

// ceil(log2(1 + alpha*power/noise_psd)), floored at one data unit.
// Throws std::invalid_argument on nonpositive or non-finite inputs.
int shannon_rate(double alpha, double power, double noise_psd);

// Materializes the rate function over the finite gain/power alphabets.
RateTable build_rate_table(const ChannelDistribution& channel,
                           const PowerMenu& menu, double noise_psd);

// Returns every violated invariant (empty list == valid). Total: never
// throws, any garbage input maps to violations.
std::vector<Violation> validate_model(const LinkModel& model,
                                      const SystemConfig& config);

// Divides probability vectors by their sums. Call after validation so that
// downstream expectations see distributions summing to exactly one.
void renormalize(LinkModel& model);

// Smallest per-slot delivery at the lowest power, over all gains.
int kmin(const LinkModel& model);

// Largest supported packet length.
int lmax(const LinkModel& model);

// Hard cap on the slots any frame can take: ceil(lmax / kmin).
std::uint64_t frame_slot_cap(const LinkModel& model);

}  // namespace miasched

#endif  // MIASCHED_MODEL_HPP
