#pragma once

#include <cmath>
#include <cstdint>

namespace linorl::rng {

// Counter-based generator: every 64-bit draw is a stateless hash of
// (base seed, stream index, draw counter). Trajectory tau of a dataset uses
// stream index tau, so any subset of trajectories can be regenerated without
// touching the others, and the schedule (serial or parallel) cannot change
// the output. All integer arithmetic, so state/action streams are
// bit-reproducible across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_pair(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ull));
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_index)
      : key_(mix_pair(seed, stream_index)) {}

  std::uint64_t next_u64() { return mix_pair(key_, counter_++); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Box-Muller; consumes exactly two draws per call.
  double next_gaussian() {
    double u1 = next_unit();
    double u2 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Samples an index from an unnormalized nonnegative weight row of length n.
  // Scans in index order, so ties and float roundoff resolve identically on
  // every run.
  template <typename Row>
  int next_categorical(const Row& weights, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += weights[i];
    double target = next_unit() * total;
    double cum = 0.0;
    for (int i = 0; i < n; ++i) {
      cum += weights[i];
      if (target < cum) return i;
    }
    return n - 1;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace linorl::rng
