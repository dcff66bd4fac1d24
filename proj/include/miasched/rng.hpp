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

#ifndef MIASCHED_RNG_HPP
#define MIASCHED_RNG_HPP

#include <array>
#include <cstdint>
#include <span>

namespace miasched {

// Philox4x32-10 counter-based generator.
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.
//
// Every draw is a pure function of (seed, stream label, index), so streams
// can be replayed from any position and distinct labels give independent
// sequences without shared state.
namespace philox {

inline constexpr std::uint32_t kMult0 = 0xD2511F53u;
inline constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& ctr,
                       const std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = std::uint64_t(kMult0) * ctr[0];
  const std::uint64_t p1 = std::uint64_t(kMult1) * ctr[2];
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    round_once(ctr, key);
  }
  return ctr;
}

}  // namespace philox

// Stream labels. Distinct labels yield independent streams under one seed.
inline constexpr std::uint64_t kChannelStream = 1;
inline constexpr std::uint64_t kPacketStream = 2;
inline constexpr std::uint64_t kSweepSeedStream = 3;
inline constexpr std::uint64_t kInstanceStream = 4;

inline std::uint64_t draw_u64(std::uint64_t seed, std::uint64_t label,
                              std::uint64_t index) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(label >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  const auto out = philox::block(ctr, key);
  return (std::uint64_t(out[1]) << 32) | out[0];
}

// Uniform in [0, 1) with 53 random bits.
inline double draw_uniform01(std::uint64_t seed, std::uint64_t label,
                             std::uint64_t index) {
  return static_cast<double>(draw_u64(seed, label, index) >> 11) * 0x1.0p-53;
}

// Convenience wrapper holding the running index of one labelled stream.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t label)
      : seed_(seed), label_(label) {}

  std::uint64_t next_u64() { return draw_u64(seed_, label_, index_++); }
  double next_uniform01() { return draw_uniform01(seed_, label_, index_++); }

  // CDF inversion over a finite distribution; returns the sampled index.
  std::size_t next_index(std::span<const double> probs) {
    const double u = next_uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
  }

  std::uint64_t position() const { return index_; }
  void seek(std::uint64_t index) { index_ = index; }

 private:
  std::uint64_t seed_;
  std::uint64_t label_;
  std::uint64_t index_ = 0;
};

}  // namespace miasched

#endif  // MIASCHED_RNG_HPP
