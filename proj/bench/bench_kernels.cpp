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

// Times the parallel kernels against their serial execution and checks that
// both produce identical results. Build target only; not part of ctest.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "miasched/oracle.hpp"
#include "miasched/simulator.hpp"

using namespace miasched;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

LinkModel bench_model() {
  LinkModel model;
  model.menu.levels = {0.5, 1.25, 2.0};
  model.channel.gains = {0.5, 1.0, 2.0};
  model.channel.probs = {0.5, 0.3, 0.2};
  model.rates.k = {{1, 2, 2}, {1, 2, 3}, {2, 3, 4}};
  model.lengths.lengths = {14};
  model.lengths.probs = {1.0};
  return model;
}

void row(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-22s %9.3fs %9.3fs %7.2fx   results %s\n", name, serial_s, parallel_s,
              serial_s / parallel_s, identical ? "identical" : "DIFFER");
}

}  // namespace

int main() {
  // Short parallel regions are at the mercy of scheduler placement unless
  // threads are bound; honor any caller-provided policy.
  setenv("OMP_PROC_BIND", "true", /*overwrite=*/0);
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serial code\n");
#endif
  std::printf("%-22s %10s %10s %8s\n", "kernel", "serial", "parallel", "speedup");

  const LinkModel model = bench_model();
  const double beta = 1.0;
  const int length = model.lengths.lengths.front();  // 3^14 ~ 4.8M policies

  {
    double t0 = now_seconds();
    const VerifyDpResult serial = verify_dp(model, length, 1.0, 2.0, beta, false);
    double t1 = now_seconds();
    const VerifyDpResult parallel = verify_dp(model, length, 1.0, 2.0, beta, true);
    double t2 = now_seconds();
    row("policy enumeration", t1 - t0, t2 - t1,
        serial.oracle_value == parallel.oracle_value &&
            serial.best_policy_index == parallel.best_policy_index);
  }

  {
    double t0 = now_seconds();
    const OracleFrontier serial = compute_frontier(model, length, beta, false, 0);
    double t1 = now_seconds();
    const OracleFrontier parallel = compute_frontier(model, length, beta, true, 0);
    double t2 = now_seconds();
    bool identical = serial.envelope.size() == parallel.envelope.size();
    for (std::size_t i = 0; identical && i < serial.envelope.size(); ++i) {
      identical = serial.envelope[i].policy_index == parallel.envelope[i].policy_index &&
                  serial.envelope[i].expected_length == parallel.envelope[i].expected_length;
    }
    row("frontier + hull", t1 - t0, t2 - t1, identical);
  }

  {
    LinkModel sweep_model = bench_model();
    sweep_model.lengths.lengths = {4, 8};
    sweep_model.lengths.probs = {0.5, 0.5};
    SystemConfig config;
    config.beta = 1.0;
    config.v = 10.0;
    config.horizon_frames = 20000;
    config.seed = 7;
    const std::vector<double> vs = {5.0, 20.0, 80.0, 320.0};
    double t0 = now_seconds();
    const auto serial = sweep_cells(sweep_model, config, vs, 6, false);
    double t1 = now_seconds();
    const auto parallel = sweep_cells(sweep_model, config, vs, 6, true);
    double t2 = now_seconds();
    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i) {
      identical = serial[i].metrics.avg_delay == parallel[i].metrics.avg_delay &&
                  serial[i].metrics.q_max == parallel[i].metrics.q_max;
    }
    row("V sweep (24 cells)", t1 - t0, t2 - t1, identical);
  }

  return 0;
}
