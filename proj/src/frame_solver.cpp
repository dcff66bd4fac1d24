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

#include "miasched/frame_solver.hpp"

#include <algorithm>
#include <sstream>

#include "miasched/errors.hpp"

namespace miasched {

double FramePenalties::min() const {
  if (r.empty()) throw ContractViolation("FramePenalties::min: empty penalty vector");
  return *std::min_element(r.begin(), r.end());
}

FramePenalties penalties(double q, double v, const PowerMenu& menu, double beta) {
  if (q < 0.0) throw ContractViolation("penalties: q must be >= 0");
  if (v < 0.0) throw ContractViolation("penalties: v must be >= 0");
  FramePenalties pen;
  pen.r.reserve(menu.size());
  for (double p : menu.levels) {
    pen.r.push_back(v + q * (p - beta));
  }
  return pen;
}

CaseMode case_split(const FramePenalties& pen) {
  // Strict comparison: a penalty of exactly zero stays in Case 2. The
  // decision only matters on a measure-zero boundary.
  return pen.min() < 0.0 ? CaseMode::kCase1 : CaseMode::kCase2;
}

double case1_threshold(double v, const PowerMenu& menu, double beta) {
  return v / (beta - menu.lowest());
}

ValueTable ValueTable::case1(int length) {
  if (length < 1) throw ContractViolation("ValueTable::case1: length must be >= 1");
  ValueTable t;
  t.mode = CaseMode::kCase1;
  t.length = length;
  return t;
}

namespace {

void check_case2(const FramePenalties& pen, int length, const char* who) {
  if (length < 1) {
    throw ContractViolation(std::string(who) + ": length must be >= 1");
  }
  if (pen.r.empty()) {
    throw ContractViolation(std::string(who) + ": empty penalty vector");
  }
  if (pen.min() < 0.0) {
    throw ContractViolation(std::string(who) +
                            ": called with Case-1 penalties (negative entry)");
  }
}

}  // namespace

ValueTable build_value_table_static(int length, const FramePenalties& pen,
                                    std::span<const int> option_rates) {
  check_case2(pen, length, "build_value_table_static");
  if (option_rates.size() != pen.size()) {
    throw ContractViolation("build_value_table_static: rates/penalties size mismatch");
  }
  ValueTable t;
  t.mode = CaseMode::kCase2;
  t.length = length;
  t.values.assign(static_cast<std::size_t>(length) + 1, 0.0);
  t.choice.assign(static_cast<std::size_t>(length) + 1, 0);
  for (int k = 1; k <= length; ++k) {
    double best = 0.0;
    int best_j = -1;
    for (std::size_t j = 0; j < pen.size(); ++j) {
      const int down = k - option_rates[j];
      const double cand = pen.r[j] + (down > 0 ? t.values[down] : 0.0);
      if (best_j < 0 || cand < best) {
        best = cand;
        best_j = static_cast<int>(j);
      }
    }
    t.values[k] = best;
    t.choice[k] = best_j;
  }
  return t;
}

ValueTable build_value_table_stochastic(int length, const FramePenalties& pen,
                                        const LinkModel& model,
                                        std::span<const double> assumed_probs) {
  check_case2(pen, length, "build_value_table_stochastic");
  const auto& rates = model.rates.k;
  if (rates.size() != model.channel.size() || rates.empty() ||
      rates.front().size() != pen.size()) {
    throw ContractViolation("build_value_table_stochastic: rate table shape mismatch");
  }
  std::span<const double> probs =
      assumed_probs.empty() ? std::span<const double>(model.channel.probs) : assumed_probs;
  if (probs.size() != rates.size()) {
    throw ContractViolation("build_value_table_stochastic: probability vector size mismatch");
  }

  ValueTable t;
  t.mode = CaseMode::kCase2;
  t.length = length;
  t.values.assign(static_cast<std::size_t>(length) + 1, 0.0);
  t.choice.assign(static_cast<std::size_t>(length) + 1, 0);
  const std::size_t num_gains = rates.size();
  for (int k = 1; k <= length; ++k) {
    double best = 0.0;
    int best_j = -1;
    for (std::size_t j = 0; j < pen.size(); ++j) {
      double cand = pen.r[j];
      for (std::size_t i = 0; i < num_gains; ++i) {
        const int down = k - rates[i][j];
        cand += probs[i] * (down > 0 ? t.values[down] : 0.0);
      }
      if (best_j < 0 || cand < best) {
        best = cand;
        best_j = static_cast<int>(j);
      }
    }
    t.values[k] = best;
    t.choice[k] = best_j;
  }
  return t;
}

int choose_power(const ValueTable& table, int remaining) {
  if (remaining < 1 || remaining > table.length) {
    std::ostringstream os;
    os << "choose_power: remaining=" << remaining << " outside [1, " << table.length << "]";
    throw ContractViolation(os.str());
  }
  if (table.mode == CaseMode::kCase1) return 0;
  return table.choice[remaining];
}

}  // namespace miasched
