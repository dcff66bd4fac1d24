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

#ifndef MIASCHED_FRAME_SOLVER_HPP
#define MIASCHED_FRAME_SOLVER_HPP

#include <span>
#include <vector>

#include "miasched/model.hpp"

namespace miasched {

// Sign split of the per-slot penalties. Case 1: some option has a strictly
// negative penalty, so the cheapest policy is the smallest power for the rest
// of the frame. Case 2: all penalties are nonnegative and the dynamic program
// applies. A penalty of exactly zero belongs to Case 2.
enum class CaseMode : int { kCase1 = 1, kCase2 = 2 };

// Per-slot penalty of each power option: r[j] = v + q * (P_j - beta).
// Nondecreasing in j whenever q >= 0.
struct FramePenalties {
  std::vector<double> r;

  std::size_t size() const { return r.size(); }
  double min() const;
};

FramePenalties penalties(double q, double v, const PowerMenu& menu, double beta);

CaseMode case_split(const FramePenalties& pen);

// Threshold on the queue above which Case 1 holds: q > v / (beta - P_1).
double case1_threshold(double v, const PowerMenu& menu, double beta);

// Value table for one frame. values[k] is the minimal expected remaining
// penalty with k data units still owed; choice[k] is the option achieving it
// (smallest index on ties). values[0] == 0. Case-1 tables carry no values:
// the policy is option 0 everywhere.
struct ValueTable {
  CaseMode mode = CaseMode::kCase2;
  int length = 0;
  std::vector<double> values;  // size length+1 in Case 2, empty in Case 1
  std::vector<int> choice;     // size length+1 in Case 2; choice[0] unused

  static ValueTable case1(int length);
};

// Deterministic-channel table: values[k] = min_j (r[j] + values[k - rate[j]])
// with values clamped to 0 at and below state 0. `option_rates` is the rate
// of each power option at the fixed gain.
// Requires Case-2 penalties and length >= 1.
ValueTable build_value_table_static(int length, const FramePenalties& pen,
                                    std::span<const int> option_rates);

// Random-channel table:
//   values[k] = min_j (r[j] + sum_i probs[i] * values[k - rates[i][j]]).
// `assumed_probs`, when nonempty, replaces the model's channel probabilities
// (the sample-path queue guarantees survive a wrong distribution here).
// Requires Case-2 penalties and length >= 1.
ValueTable build_value_table_stochastic(int length, const FramePenalties& pen,
                                        const LinkModel& model,
                                        std::span<const double> assumed_probs = {});

// Power option for a slot with `remaining` units still owed (1-based state,
// must be within the table). Case 1 always answers option 0.
int choose_power(const ValueTable& table, int remaining);

}  // namespace miasched

#endif  // MIASCHED_FRAME_SOLVER_HPP
