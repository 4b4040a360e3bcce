#pragma once

#include <cmath>
#include <cstdint>

namespace fwi {

// splitmix64; used both as a generator and to derive independent sub-seeds
// so that parallel per-scenario generation matches serial generation.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  splitmix64(s);
  return splitmix64(s);
}

// Deterministic generator with platform-independent output (stdlib
// distributions are implementation-defined, so we roll our own).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // warm up
    splitmix64(state_);
    splitmix64(state_);
  }

  uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1)
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // integer in [0, n)
  uint64_t below(uint64_t n) { return next_u64() % n; }

  double normal() {
    // Box-Muller; spare value intentionally discarded for simplicity
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <class It>
  void shuffle(It first, It last) {
    auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      auto j = static_cast<decltype(i)>(below(static_cast<uint64_t>(i + 1)));
      std::swap(first[i], first[j]);
    }
  }

 private:
  uint64_t state_;
};

}  // namespace fwi
