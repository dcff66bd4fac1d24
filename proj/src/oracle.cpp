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

#include "miasched/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "miasched/errors.hpp"
#include "miasched/frame_solver.hpp"

namespace miasched {

std::uint64_t policy_space_size(std::size_t num_options, int length,
                                std::uint64_t guard) {
  if (num_options < 1 || length < 1) {
    throw ContractViolation("policy_space_size: need num_options >= 1 and length >= 1");
  }
  std::uint64_t count = 1;
  for (int i = 0; i < length; ++i) {
    if (count > guard / num_options) {
      std::ostringstream os;
      os << "policy enumeration guard exceeded: " << num_options << "^" << length
         << " > " << guard;
      throw EnumerationGuardError(os.str());
    }
    count *= num_options;
  }
  if (count > guard) {
    std::ostringstream os;
    os << "policy enumeration guard exceeded: " << count << " > " << guard;
    throw EnumerationGuardError(os.str());
  }
  return count;
}

FramePolicy decode_policy(std::uint64_t index, std::size_t num_options, int length) {
  FramePolicy p;
  p.option.resize(static_cast<std::size_t>(length));
  for (int k = 0; k < length; ++k) {
    p.option[k] = static_cast<std::uint8_t>(index % num_options);
    index /= num_options;
  }
  return p;
}

namespace {

void check_policy(const FramePolicy& policy, const LinkModel& model, int length,
                  const char* who) {
  if (length < 1 || policy.option.size() != static_cast<std::size_t>(length)) {
    throw ContractViolation(std::string(who) + ": policy does not cover states 1..L");
  }
  for (std::uint8_t j : policy.option) {
    if (j >= model.menu.size()) {
      throw ContractViolation(std::string(who) + ": policy option out of range");
    }
  }
}

// Enumeration works against a flat copy of the rate table, transposed so the
// inner loop over gains reads contiguously: rate(i, j) = flat[j * gains + i].
struct FlatRates {
  std::vector<int> flat;
  std::size_t num_gains = 0;

  explicit FlatRates(const RateTable& rates) {
    num_gains = rates.num_gains();
    const std::size_t num_options = rates.num_powers();
    flat.resize(num_gains * num_options);
    for (std::size_t i = 0; i < num_gains; ++i) {
      for (std::size_t j = 0; j < num_options; ++j) {
        flat[j * num_gains + i] = rates.k[i][j];
      }
    }
  }
  const int* option_rates(int j) const { return flat.data() + j * num_gains; }
};

// f[k] = cost[d(k)] + sum_i probs[i] * f[k - K(i, d(k))], f clamped to 0 at
// and below state 0. Valid in increasing k because every rate is >= 1.
double eval_expected_cost(const std::uint8_t* digits, int length,
                          const FlatRates& rates, const double* probs,
                          const double* cost, double* f) {
  f[0] = 0.0;
  for (int k = 1; k <= length; ++k) {
    const int j = digits[k - 1];
    const int* row = rates.option_rates(j);
    double acc = cost[j];
    for (std::size_t i = 0; i < rates.num_gains; ++i) {
      const int down = k - row[i];
      acc += probs[i] * (down > 0 ? f[down] : 0.0);
    }
    f[k] = acc;
  }
  return f[length];
}

// Fused length/surplus recursion; writes E[T] and E[surplus] of the policy.
void eval_length_surplus(const std::uint8_t* digits, int length,
                         const FlatRates& rates, const double* probs,
                         const double* surplus_cost, double* e, double* s,
                         double* out_e, double* out_s) {
  e[0] = 0.0;
  s[0] = 0.0;
  for (int k = 1; k <= length; ++k) {
    const int j = digits[k - 1];
    const int* row = rates.option_rates(j);
    double acc_e = 1.0;
    double acc_s = surplus_cost[j];
    for (std::size_t i = 0; i < rates.num_gains; ++i) {
      const int down = k - row[i];
      if (down > 0) {
        acc_e += probs[i] * e[down];
        acc_s += probs[i] * s[down];
      }
    }
    e[k] = acc_e;
    s[k] = acc_s;
  }
  *out_e = e[length];
  *out_s = s[length];
}

// Little-endian digit decode without allocating.
void decode_into(std::uint64_t index, std::size_t num_options, int length,
                 std::uint8_t* digits) {
  for (int k = 0; k < length; ++k) {
    digits[k] = static_cast<std::uint8_t>(index % num_options);
    index /= num_options;
  }
}

// Advance a little-endian base-`base` digit string by one.
void increment_digits(std::uint8_t* digits, int length, std::size_t base) {
  for (int i = 0; i < length; ++i) {
    if (static_cast<std::size_t>(++digits[i]) < base) return;
    digits[i] = 0;
  }
}

constexpr std::uint64_t kBlockSize = 8192;

struct BestPolicy {
  double value = std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;
  bool any = false;
};

// Lexicographic (value, index) min: associative, commutative, so the merge
// order across threads cannot change the result.
void merge_best(BestPolicy& into, const BestPolicy& other) {
  if (!other.any) return;
  if (!into.any || other.value < into.value ||
      (other.value == into.value && other.index < into.index)) {
    into = other;
  }
}

double cross(const FrontierPoint& o, const FrontierPoint& a, const FrontierPoint& b) {
  return (a.expected_surplus - o.expected_surplus) * (b.expected_length - o.expected_length) -
         (a.expected_length - o.expected_length) * (b.expected_surplus - o.expected_surplus);
}

// Lower convex hull over (surplus, length), vertices in ascending surplus.
// Ties in surplus keep the lowest (length, policy_index); collinear interior
// points are dropped, so consecutive slopes are strictly increasing.
std::vector<FrontierPoint> lower_hull(std::vector<FrontierPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (a.expected_surplus != b.expected_surplus) return a.expected_surplus < b.expected_surplus;
    if (a.expected_length != b.expected_length) return a.expected_length < b.expected_length;
    return a.policy_index < b.policy_index;
  });
  std::vector<FrontierPoint> hull;
  hull.reserve(64);
  for (const FrontierPoint& p : pts) {
    if (!hull.empty() && hull.back().expected_surplus == p.expected_surplus) continue;
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  return hull;
}

}  // namespace

PolicyStats policy_stats(const FramePolicy& policy, const LinkModel& model,
                         int length, double beta) {
  check_policy(policy, model, length, "policy_stats");
  const FlatRates rates(model.rates);
  std::vector<double> surplus_cost(model.menu.size());
  for (std::size_t j = 0; j < model.menu.size(); ++j) {
    surplus_cost[j] = model.menu.levels[j] - beta;
  }
  std::vector<double> e(static_cast<std::size_t>(length) + 1);
  std::vector<double> s(static_cast<std::size_t>(length) + 1);
  PolicyStats stats;
  eval_length_surplus(policy.option.data(), length, rates, model.channel.probs.data(),
                      surplus_cost.data(), e.data(), s.data(), &stats.expected_length,
                      &stats.expected_surplus);
  return stats;
}

double policy_expected_cost(const FramePolicy& policy, const LinkModel& model,
                            int length, std::span<const double> per_option_cost) {
  check_policy(policy, model, length, "policy_expected_cost");
  if (per_option_cost.size() != model.menu.size()) {
    throw ContractViolation("policy_expected_cost: cost vector size mismatch");
  }
  const FlatRates rates(model.rates);
  std::vector<double> f(static_cast<std::size_t>(length) + 1);
  return eval_expected_cost(policy.option.data(), length, rates,
                            model.channel.probs.data(), per_option_cost.data(),
                            f.data());
}

VerifyDpResult verify_dp(const LinkModel& model, int length, double q, double v,
                         double beta, bool parallel) {
  const FramePenalties pen = penalties(q, v, model.menu, beta);
  if (case_split(pen) == CaseMode::kCase1) {
    throw ContractViolation("verify_dp: requires Case-2 penalties (all >= 0)");
  }
  const std::size_t num_options = model.menu.size();
  const std::uint64_t count = policy_space_size(num_options, length);
  const std::uint64_t num_blocks = (count + kBlockSize - 1) / kBlockSize;

  const ValueTable table = build_value_table_stochastic(length, pen, model);
  const FlatRates rates(model.rates);
  const double* probs = model.channel.probs.data();

  const auto process_block = [&](std::uint64_t b, std::uint8_t* digits, double* f) {
    const std::uint64_t begin = b * kBlockSize;
    const std::uint64_t end = std::min(count, begin + kBlockSize);
    decode_into(begin, num_options, length, digits);
    BestPolicy best;
    for (std::uint64_t p = begin; p < end; ++p) {
      const double value = eval_expected_cost(digits, length, rates, probs, pen.r.data(), f);
      merge_best(best, {value, p, true});
      increment_digits(digits, length, num_options);
    }
    return best;
  };

  BestPolicy global;
  if (parallel) {
#pragma omp parallel
    {
      BestPolicy mine;
      std::vector<std::uint8_t> digits(static_cast<std::size_t>(length));
      std::vector<double> f(static_cast<std::size_t>(length) + 1);
#pragma omp for schedule(dynamic, 1) nowait
      for (long long b = 0; b < static_cast<long long>(num_blocks); ++b) {
        merge_best(mine, process_block(static_cast<std::uint64_t>(b), digits.data(), f.data()));
      }
#pragma omp critical(miasched_verify_dp_merge)
      merge_best(global, mine);
    }
  } else {
    std::vector<std::uint8_t> digits(static_cast<std::size_t>(length));
    std::vector<double> f(static_cast<std::size_t>(length) + 1);
    for (std::uint64_t b = 0; b < num_blocks; ++b) {
      merge_best(global, process_block(b, digits.data(), f.data()));
    }
  }

  VerifyDpResult result;
  result.dp_value = table.values[length];
  result.oracle_value = global.value;
  result.best_policy_index = global.index;
  result.policy_count = count;
  result.match = std::abs(result.dp_value - result.oracle_value) <=
                 1e-9 * std::max(1.0, std::abs(result.oracle_value));
  return result;
}

OracleFrontier compute_frontier(const LinkModel& model, int length, double beta,
                                bool parallel, std::uint64_t keep_points_cap) {
  const std::size_t num_options = model.menu.size();
  const std::uint64_t count = policy_space_size(num_options, length);
  const std::uint64_t num_blocks = (count + kBlockSize - 1) / kBlockSize;

  std::vector<double> surplus_cost(num_options);
  for (std::size_t j = 0; j < num_options; ++j) {
    surplus_cost[j] = model.menu.levels[j] - beta;
  }

  OracleFrontier frontier;
  frontier.length = length;
  frontier.policy_count = count;
  const bool keep_points = count <= keep_points_cap;
  if (keep_points) frontier.points.resize(count);

  std::vector<std::vector<FrontierPoint>> block_hulls(num_blocks);
  const FlatRates rates(model.rates);
  const double* probs = model.channel.probs.data();

  const auto process_block = [&](std::uint64_t b, std::uint8_t* digits, double* e,
                                 double* s) {
    const std::uint64_t begin = b * kBlockSize;
    const std::uint64_t end = std::min(count, begin + kBlockSize);
    decode_into(begin, num_options, length, digits);
    std::vector<FrontierPoint> local;
    local.reserve(end - begin);
    for (std::uint64_t p = begin; p < end; ++p) {
      FrontierPoint pt;
      pt.policy_index = p;
      eval_length_surplus(digits, length, rates, probs, surplus_cost.data(), e, s,
                          &pt.expected_length, &pt.expected_surplus);
      if (keep_points) frontier.points[p] = pt;
      local.push_back(pt);
      increment_digits(digits, length, num_options);
    }
    block_hulls[b] = lower_hull(std::move(local));
  };

  if (parallel) {
#pragma omp parallel
    {
      std::vector<std::uint8_t> digits(static_cast<std::size_t>(length));
      std::vector<double> e(static_cast<std::size_t>(length) + 1);
      std::vector<double> s(static_cast<std::size_t>(length) + 1);
#pragma omp for schedule(dynamic, 1)
      for (long long b = 0; b < static_cast<long long>(num_blocks); ++b) {
        process_block(static_cast<std::uint64_t>(b), digits.data(), e.data(), s.data());
      }
    }
  } else {
    std::vector<std::uint8_t> digits(static_cast<std::size_t>(length));
    std::vector<double> e(static_cast<std::size_t>(length) + 1);
    std::vector<double> s(static_cast<std::size_t>(length) + 1);
    for (std::uint64_t b = 0; b < num_blocks; ++b) {
      process_block(b, digits.data(), e.data(), s.data());
    }
  }

  // A vertex of the union's hull is a vertex of its own block's hull, so
  // merging block hulls in block order loses nothing and keeps the final
  // chain deterministic.
  std::vector<FrontierPoint> candidates;
  for (const auto& h : block_hulls) {
    candidates.insert(candidates.end(), h.begin(), h.end());
  }
  frontier.envelope = lower_hull(std::move(candidates));
  return frontier;
}

namespace {

// Position on one envelope: the pure vertex `right_vertex`, or when
// left_weight > 0 the mixture of vertices right_vertex-1 / right_vertex.
struct EnvelopePick {
  std::size_t right_vertex = 0;
  double left_weight = 0.0;
};

struct EnvelopeSegment {
  double rho = 0.0;  // delay increase per unit of surplus reduction
  std::size_t length_slot = 0;
  std::size_t left_vertex = 0;
};

}  // namespace

ThetaStarResult theta_star(const LinkModel& model, double beta, bool parallel) {
  ThetaStarResult result;
  const auto& lengths = model.lengths.lengths;
  const auto& probs = model.lengths.probs;
  if (lengths.empty() || probs.size() != lengths.size()) {
    throw ContractViolation("theta_star: invalid packet length distribution");
  }

  result.frontiers.reserve(lengths.size());
  for (int length : lengths) {
    result.frontiers.push_back(compute_frontier(model, length, beta, parallel));
  }

  // Start every length at its minimum-delay vertex, cheapest surplus first on
  // ties. If the mixture already meets the budget we are done; otherwise walk
  // leftward along the envelopes, always consuming the segment that buys
  // surplus at the smallest delay cost. The per-unit cost rho is independent
  // of the length's probability, so one global sorted pass is exact.
  std::vector<EnvelopePick> picks(lengths.size());
  double total_surplus = 0.0;
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const auto& env = result.frontiers[li].envelope;
    std::size_t best = 0;
    for (std::size_t i = 1; i < env.size(); ++i) {
      if (env[i].expected_length < env[best].expected_length) best = i;
    }
    picks[li] = {best, 0.0};
    total_surplus += probs[li] * env[best].expected_surplus;
  }

  if (total_surplus > 0.0) {
    std::vector<EnvelopeSegment> segments;
    for (std::size_t li = 0; li < lengths.size(); ++li) {
      const auto& env = result.frontiers[li].envelope;
      for (std::size_t i = 0; i < picks[li].right_vertex; ++i) {
        const double ds = env[i + 1].expected_surplus - env[i].expected_surplus;
        const double de = env[i].expected_length - env[i + 1].expected_length;
        segments.push_back({de / ds, li, i});
      }
    }
    // Within one envelope rho strictly decreases toward the left, so the
    // ascending sort visits each envelope right-to-left as required.
    std::sort(segments.begin(), segments.end(),
              [](const EnvelopeSegment& a, const EnvelopeSegment& b) {
                if (a.rho != b.rho) return a.rho < b.rho;
                if (a.length_slot != b.length_slot) return a.length_slot < b.length_slot;
                return a.left_vertex > b.left_vertex;
              });
    for (const EnvelopeSegment& seg : segments) {
      const auto& env = result.frontiers[seg.length_slot].envelope;
      const double p = probs[seg.length_slot];
      const double ds =
          env[seg.left_vertex + 1].expected_surplus - env[seg.left_vertex].expected_surplus;
      const double reduction = p * ds;
      if (total_surplus - reduction > 0.0) {
        total_surplus -= reduction;
        picks[seg.length_slot] = {seg.left_vertex, 0.0};
      } else {
        const double fraction = reduction > 0.0 ? total_surplus / reduction : 1.0;
        picks[seg.length_slot] = {seg.left_vertex + 1, fraction};
        total_surplus = 0.0;
        break;
      }
    }
    if (total_surplus > 0.0) {
      throw ContractViolation(
          "theta_star: no feasible mixture; the model violates P_1 < beta");
    }
  }

  // Recompute the mixture's expectations from the picks and emit the support.
  double theta = 0.0;
  double surplus = 0.0;
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const auto& env = result.frontiers[li].envelope;
    const EnvelopePick pick = picks[li];
    const auto emit = [&](const FrontierPoint& pt, double weight) {
      if (weight <= 0.0) return;
      SupportAtom atom;
      atom.length = lengths[li];
      atom.weight = weight;
      atom.policy = decode_policy(pt.policy_index, model.menu.size(), lengths[li]);
      atom.expected_length = pt.expected_length;
      atom.expected_surplus = pt.expected_surplus;
      result.support.push_back(std::move(atom));
      theta += probs[li] * weight * pt.expected_length;
      surplus += probs[li] * weight * pt.expected_surplus;
    };
    if (pick.left_weight > 0.0) {
      emit(env[pick.right_vertex - 1], pick.left_weight);
      emit(env[pick.right_vertex], 1.0 - pick.left_weight);
    } else {
      emit(env[pick.right_vertex], 1.0);
    }
  }
  result.theta = theta;
  result.expected_surplus = surplus;
  return result;
}

}  // namespace miasched
