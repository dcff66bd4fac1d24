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

#ifndef MIASCHED_ORACLE_HPP
#define MIASCHED_ORACLE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "miasched/model.hpp"

namespace miasched {

// Refuse brute-force enumeration beyond this many policies per packet length.
inline constexpr std::uint64_t kEnumerationGuard = 10'000'000;

// Deterministic within-frame policy: option[k-1] is the power option used
// whenever k data units are still owed. Remaining demand is the whole frame
// state, so these maps span every adaptive frame policy worth enumerating.
struct FramePolicy {
  std::vector<std::uint8_t> option;
};

// Number of such maps for a frame of `length` units over `num_options`
// options, i.e. num_options^length. Throws EnumerationGuardError when it
// exceeds `guard`.
std::uint64_t policy_space_size(std::size_t num_options, int length,
                                std::uint64_t guard = kEnumerationGuard);

// Policy with index `index` in the enumeration order (mixed-radix digits,
// state k = 1 is the least significant digit).
FramePolicy decode_policy(std::uint64_t index, std::size_t num_options, int length);

// Exact per-frame expectations of one policy, from the forward recursions
//   e[k] = 1 + sum_i phi_i * e[k - K(i, pi(k))]
//   s[k] = (P_{pi(k)} - beta) + sum_i phi_i * s[k - K(i, pi(k))]
// with e, s clamped to 0 at and below state 0.
struct PolicyStats {
  double expected_length = 0.0;   // E[T], slots
  double expected_surplus = 0.0;  // E[sum (P(t) - beta)]

  double expected_penalty(double q, double v) const {
    return v * expected_length + q * expected_surplus;
  }
};

PolicyStats policy_stats(const FramePolicy& policy, const LinkModel& model,
                         int length, double beta);

// Expected total of an arbitrary per-option slot cost under one policy,
// by the same forward recursion. This is the primitive the enumeration
// oracles are built from.
double policy_expected_cost(const FramePolicy& policy, const LinkModel& model,
                            int length, std::span<const double> per_option_cost);

// Compares the frame DP against exhaustive policy enumeration.
struct VerifyDpResult {
  double dp_value = 0.0;      // value table entry at the full length
  double oracle_value = 0.0;  // min expected penalty over all policies
  std::uint64_t best_policy_index = 0;
  std::uint64_t policy_count = 0;
  bool match = false;         // |dp - oracle| <= 1e-9 * max(1, |oracle|)
};

VerifyDpResult verify_dp(const LinkModel& model, int length, double q, double v,
                         double beta, bool parallel = true);

// One enumerated policy's (surplus, length) expectation pair.
struct FrontierPoint {
  double expected_surplus = 0.0;
  double expected_length = 0.0;
  std::uint64_t policy_index = 0;
};

// All achievable per-frame expectation pairs for one packet length, plus the
// lower convex envelope (vertices in ascending surplus order). The full point
// cloud is retained only while it fits `keep_points_cap`; the envelope is
// what every consumer needs.
struct OracleFrontier {
  int length = 0;
  std::uint64_t policy_count = 0;
  std::vector<FrontierPoint> points;
  std::vector<FrontierPoint> envelope;
};

OracleFrontier compute_frontier(const LinkModel& model, int length, double beta,
                                bool parallel = true,
                                std::uint64_t keep_points_cap = 1u << 20);

// One component of the optimal stationary mixture: with probability `weight`
// (conditioned on this packet length) run `policy` for the frame.
struct SupportAtom {
  int length = 0;
  double weight = 0.0;
  FramePolicy policy;
  double expected_length = 0.0;
  double expected_surplus = 0.0;
};

// Best long-run average delay over stationary randomized frame policies,
// subject to nonpositive expected power surplus per frame.
struct ThetaStarResult {
  double theta = 0.0;             // optimal expected frame length, slots
  double expected_surplus = 0.0;  // of the optimal mixture (<= 0)
  std::vector<SupportAtom> support;
  std::vector<OracleFrontier> frontiers;  // one per packet length, model order
};

ThetaStarResult theta_star(const LinkModel& model, double beta, bool parallel = true);

}  // namespace miasched

#endif  // MIASCHED_ORACLE_HPP
