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

#include "miasched/model.hpp"

#include "miasched/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace miasched {

namespace {

constexpr double kProbSumTolerance = 1e-12;

bool finite(double x) { return std::isfinite(x); }

void require_positive_finite(double x, const char* field) {
  if (!finite(x) || x <= 0.0) {
    std::ostringstream os;
    os << "shannon_rate: " << field << " must be a positive finite number, got " << x;
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

int shannon_rate(double alpha, double power, double noise_psd) {
  require_positive_finite(alpha, "alpha");
  require_positive_finite(power, "power");
  require_positive_finite(noise_psd, "noise_psd");
  const double snr = alpha * power / noise_psd;
  const double bits = std::log2(1.0 + snr);
  if (!finite(bits) || bits > static_cast<double>(std::numeric_limits<int>::max() - 1)) {
    throw std::invalid_argument("shannon_rate: rate exceeds integer range");
  }
  const int units = static_cast<int>(std::ceil(bits));
  return std::max(units, 1);
}

RateTable build_rate_table(const ChannelDistribution& channel,
                           const PowerMenu& menu, double noise_psd) {
  RateTable table;
  table.k.resize(channel.gains.size());
  for (std::size_t i = 0; i < channel.gains.size(); ++i) {
    table.k[i].resize(menu.levels.size());
    for (std::size_t j = 0; j < menu.levels.size(); ++j) {
      table.k[i][j] = shannon_rate(channel.gains[i], menu.levels[j], noise_psd);
    }
  }
  return table;
}

namespace {

void check_probs(const std::vector<double>& probs, std::size_t expected_size,
                 const char* prefix, std::vector<Violation>& out) {
  if (probs.size() != expected_size) {
    out.push_back({std::string(prefix) + ".size_mismatch",
                   std::string(prefix) + ": values and probabilities differ in length"});
    return;
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p)) {
      out.push_back({std::string(prefix) + ".prob_nonfinite",
                     std::string(prefix) + ": probability is not finite"});
      return;
    }
    if (p < 0.0) {
      out.push_back({std::string(prefix) + ".prob_negative",
                     std::string(prefix) + ": negative probability"});
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance) {
    std::ostringstream os;
    os << prefix << ": probabilities sum to " << sum << ", expected 1";
    out.push_back({std::string(prefix) + ".prob_sum", os.str()});
  }
}

}  // namespace

std::vector<Violation> validate_model(const LinkModel& model,
                                      const SystemConfig& config) {
  std::vector<Violation> v;

  // Power menu.
  const auto& menu = model.menu.levels;
  if (menu.empty()) {
    v.push_back({"menu.empty", "power menu is empty"});
  } else {
    bool increasing = true;
    bool positive = menu.front() > 0.0;
    bool all_finite = true;
    for (std::size_t j = 0; j < menu.size(); ++j) {
      if (!finite(menu[j])) all_finite = false;
      if (j > 0 && !(menu[j] > menu[j - 1])) increasing = false;
    }
    if (!all_finite) v.push_back({"menu.nonfinite", "power menu contains a non-finite value"});
    if (!positive) v.push_back({"menu.nonpositive", "power menu entries must be > 0"});
    if (!increasing) v.push_back({"menu.not_increasing", "power menu not strictly increasing"});
  }

  // Channel alphabet.
  const auto& gains = model.channel.gains;
  if (gains.empty()) {
    v.push_back({"channel.empty", "channel alphabet is empty"});
  } else {
    for (double g : gains) {
      if (!finite(g)) {
        v.push_back({"channel.gain_nonfinite", "channel gain is not finite"});
        break;
      }
    }
    for (double g : gains) {
      if (!(g > 0.0)) {
        v.push_back({"channel.gain_nonpositive", "channel gains must be > 0"});
        break;
      }
    }
  }
  check_probs(model.channel.probs, gains.size(), "channel", v);

  // Rate table: shape, positivity, monotonicity in power (rows) and in gain
  // (columns, taken in ascending-gain order).
  const auto& k = model.rates.k;
  bool shape_ok = k.size() == gains.size() && !k.empty();
  if (shape_ok) {
    for (const auto& row : k) {
      if (row.size() != model.menu.size() || row.empty()) shape_ok = false;
    }
  }
  if (!shape_ok) {
    v.push_back({"rates.shape", "rate table dimensions do not match |channel| x |menu|"});
  } else {
    bool positive = true;
    bool row_monotone = true;
    for (const auto& row : k) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] < 1) positive = false;
        if (j > 0 && row[j] < row[j - 1]) row_monotone = false;
      }
    }
    if (!positive) v.push_back({"rates.entry_nonpositive", "rate table entries must be >= 1 data unit"});
    if (!row_monotone) v.push_back({"rates.power_monotonicity", "rate table not nondecreasing in power"});

    std::vector<std::size_t> order(gains.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return gains[a] < gains[b]; });
    bool col_monotone = true;
    for (std::size_t r = 1; r < order.size(); ++r) {
      for (std::size_t j = 0; j < model.menu.size(); ++j) {
        if (k[order[r]][j] < k[order[r - 1]][j]) col_monotone = false;
      }
    }
    if (!col_monotone) v.push_back({"rates.gain_monotonicity", "rate table not nondecreasing in gain"});
  }

  // Packet lengths.
  const auto& lengths = model.lengths.lengths;
  if (lengths.empty()) {
    v.push_back({"lengths.empty", "packet length set is empty"});
  } else {
    bool positive = true;
    for (int l : lengths) {
      if (l < 1) positive = false;
    }
    if (!positive) v.push_back({"lengths.nonpositive", "packet lengths must be >= 1 data unit"});
    std::vector<int> sorted = lengths;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      v.push_back({"lengths.duplicate", "packet lengths must be distinct"});
    }
  }
  check_probs(model.lengths.probs, lengths.size(), "lengths", v);

  // Config.
  if (!finite(config.beta)) {
    v.push_back({"config.beta_nonfinite", "beta is not finite"});
  } else if (!menu.empty() && finite(menu.front()) && !(menu.front() < config.beta)) {
    v.push_back({"config.beta_not_above_p1",
                 "P_1 >= beta (the smallest power must stay below the budget)"});
  }
  if (!finite(config.v) || config.v < 0.0) {
    v.push_back({"config.v_negative", "v must be a finite number >= 0"});
  }
  if (config.horizon_frames < 1) {
    v.push_back({"config.horizon_zero", "horizon_frames must be >= 1"});
  }
  if (config.noise_psd && (!finite(*config.noise_psd) || *config.noise_psd <= 0.0)) {
    v.push_back({"config.noise_nonpositive", "noise_psd must be a positive finite number"});
  }

  return v;
}

void renormalize(LinkModel& model) {
  auto scale = [](std::vector<double>& probs) {
    const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (sum > 0.0) {
      for (double& p : probs) p /= sum;
    }
  };
  scale(model.channel.probs);
  scale(model.lengths.probs);
}

int kmin(const LinkModel& model) {
  if (model.rates.k.empty() || model.rates.k.front().empty()) {
    throw ContractViolation("kmin: rate table is empty");
  }
  int m = model.rates.k.front().front();
  for (const auto& row : model.rates.k) m = std::min(m, row.front());
  return m;
}

int lmax(const LinkModel& model) {
  if (model.lengths.lengths.empty()) {
    throw ContractViolation("lmax: packet length set is empty");
  }
  return *std::max_element(model.lengths.lengths.begin(), model.lengths.lengths.end());
}

std::uint64_t frame_slot_cap(const LinkModel& model) {
  const std::uint64_t l = static_cast<std::uint64_t>(lmax(model));
  const std::uint64_t m = static_cast<std::uint64_t>(kmin(model));
  return (l + m - 1) / m;
}

}  // namespace miasched
