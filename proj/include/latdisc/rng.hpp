#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace latdisc {

// Deterministic, platform-independent random stream (xoshiro256++ seeded via
// splitmix64).  Standard-library distributions are avoided on purpose: their
// output is implementation-defined and would break byte-identical reruns.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  // Per-trial substream: mixes the trial index into the seed so streams are
  // independent and reproducible regardless of scheduling order.
  static RandomStream substream(uint64_t seed, uint64_t index) {
    return RandomStream(seed ^ ((index + 1) * 0x9E3779B97F4A7C15ULL));
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n) by rejection.
  uint64_t below(uint64_t n) {
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool coin() { return (next_u64() >> 63) != 0; }

  // Standard normal via Box-Muller (no cached second value, keeps the stream
  // position a pure function of call count).
  double normal() {
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // First t entries of a partial Fisher-Yates shuffle of {0,...,m-1}: a
  // uniformly random t-subset, in the order drawn.
  void sample_subset(int m, int t, std::vector<int>& out) {
    scratch_.resize(m);
    std::iota(scratch_.begin(), scratch_.end(), 0);
    out.resize(t);
    for (int i = 0; i < t; ++i) {
      int j = i + static_cast<int>(below(static_cast<uint64_t>(m - i)));
      std::swap(scratch_[i], scratch_[j]);
      out[i] = scratch_[i];
    }
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  std::vector<int> scratch_;
};

}  // namespace latdisc
