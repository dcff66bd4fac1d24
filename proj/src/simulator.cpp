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

#include "miasched/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#include "miasched/errors.hpp"
#include "miasched/io.hpp"

namespace miasched {

Trace simulate(const LinkModel& model, const SystemConfig& config,
               std::span<const double> assumed_probs) {
  PhiloxGainStream gains(config.seed, model.channel);
  PhiloxLengthStream packets(config.seed, model.lengths);
  Trace trace = run_horizon(model, config, gains, packets, assumed_probs);
  trace.fingerprint = scenario_fingerprint({model, config});
  return trace;
}

double c0_bound(const LinkModel& model, const SystemConfig& config) {
  const double cap = static_cast<double>(frame_slot_cap(model));
  const double worst = cap * (model.menu.highest() + config.beta);
  return 0.5 * worst * worst;
}

Metrics compute_metrics(const Trace& trace, const LinkModel& model,
                        const SystemConfig& config) {
  if (trace.frames.empty()) {
    throw ContractViolation("compute_metrics: empty trace");
  }
  Metrics m;
  m.total_frames = trace.frames.size();
  double power_total = 0.0;
  double surplus_total = 0.0;
  double drift_penalty_total = 0.0;
  for (const FrameRecord& rec : trace.frames) {
    m.total_slots += rec.num_slots;
    power_total += rec.power_sum;
    surplus_total += rec.surplus;
    m.q_max = std::max({m.q_max, rec.q_before, rec.q_after});
    const double drift = 0.5 * (rec.q_after * rec.q_after - rec.q_before * rec.q_before);
    drift_penalty_total += drift + config.v * static_cast<double>(rec.num_slots);
  }
  const double frames = static_cast<double>(m.total_frames);
  m.avg_delay = static_cast<double>(m.total_slots) / frames;
  m.avg_power_per_slot = power_total / static_cast<double>(m.total_slots);
  m.constraint_slack = m.avg_power_per_slot - config.beta;
  m.per_frame_surplus_mean = surplus_total / frames;
  m.drift_penalty_mean = drift_penalty_total / frames;
  m.c0_bound = c0_bound(model, config);
  return m;
}

std::vector<SweepCell> sweep_cells(const LinkModel& model, const SystemConfig& base,
                                   std::span<const double> v_values, int repetitions,
                                   bool parallel) {
  if (v_values.empty() || repetitions < 1) {
    throw ContractViolation("sweep_cells: need at least one V value and one repetition");
  }
  const std::size_t num_cells = v_values.size() * static_cast<std::size_t>(repetitions);
  std::vector<SweepCell> cells(num_cells);

  const auto run_cell = [&](std::size_t ci) {
    const std::size_t vi = ci / static_cast<std::size_t>(repetitions);
    const int rep = static_cast<int>(ci % static_cast<std::size_t>(repetitions));
    SweepCell cell;
    cell.v = v_values[vi];
    cell.repetition = rep;
    cell.seed = draw_u64(base.seed, kSweepSeedStream, ci);
    SystemConfig config = base;
    config.v = cell.v;
    config.seed = cell.seed;
    const Trace trace = simulate(model, config);
    cell.metrics = compute_metrics(trace, model, config);
    cells[ci] = cell;
  };

  if (parallel) {
    // Exceptions cannot unwind out of the parallel region; park the first
    // one and rethrow after the join.
    std::exception_ptr first_error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1)
    for (long long ci = 0; ci < static_cast<long long>(num_cells); ++ci) {
      try {
        run_cell(static_cast<std::size_t>(ci));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (std::size_t ci = 0; ci < num_cells; ++ci) run_cell(ci);
  }
  return cells;
}

std::vector<SweepRow> aggregate_sweep(std::span<const SweepCell> cells,
                                      std::span<const double> v_values,
                                      int repetitions) {
  std::vector<SweepRow> rows;
  rows.reserve(v_values.size());
  for (std::size_t vi = 0; vi < v_values.size(); ++vi) {
    SweepRow row;
    row.v = v_values[vi];
    double delay_sum = 0.0;
    double slack_sum = 0.0;
    for (int rep = 0; rep < repetitions; ++rep) {
      const Metrics& m = cells[vi * repetitions + rep].metrics;
      delay_sum += m.avg_delay;
      slack_sum += m.constraint_slack;
      row.q_max = std::max(row.q_max, m.q_max);
    }
    const double n = static_cast<double>(repetitions);
    row.mean_delay = delay_sum / n;
    row.mean_slack = slack_sum / n;
    if (repetitions > 1) {
      double ss = 0.0;
      for (int rep = 0; rep < repetitions; ++rep) {
        const double d = cells[vi * repetitions + rep].metrics.avg_delay - row.mean_delay;
        ss += d * d;
      }
      row.se_delay = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> sweep_v(const LinkModel& model, const SystemConfig& base,
                              std::span<const double> v_values, int repetitions,
                              bool parallel) {
  const std::vector<SweepCell> cells =
      sweep_cells(model, base, v_values, repetitions, parallel);
  return aggregate_sweep(cells, v_values, repetitions);
}

}  // namespace miasched
