#pragma once

#include <cmath>
#include <cstdint>

namespace meshtrap {

// SplitMix64 stream. Every sample/trial seeds its own instance, so results
// never depend on which worker ran what. Normal deviates use the basic
// Box-Muller transform and consume exactly two uniforms each, keeping the
// stream position a pure function of the draw count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]; never 0, so log() is safe.
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    const double u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(kTwoPi * v);
  }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925287;
  std::uint64_t state_;
};

// hash(seed, index): hands out decorrelated per-item seeds. Deterministic,
// order-free, and stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  Rng h(seed ^ (0x9e3779b97f4a7c15ull + index * 0xd1342543de82ef95ull));
  h.next_u64();
  return h.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  return derive_seed(derive_seed(seed, i), j);
}

}  // namespace meshtrap
