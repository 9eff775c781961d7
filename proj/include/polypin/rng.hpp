#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace polypin {

// Finalizer-style 64-bit mixer (the splitmix64 output function).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// splitmix64: counter-based generator. The n-th output is a pure function
// of (state0, n), so seeding fixes the whole stream bit-for-bit on every
// platform. This is the generator named in all reproducibility docs.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xffffffffffffffffull; }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Independent named substream: hash (seed, stream) into a fresh state.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(mix64(seed) ^ mix64(mix64(stream) + 0x632be59bd9b4e019ull));
}

// Uniform double in [0, 1), 53 mantissa bits.
inline double uniform01(SplitMix64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (two uniforms per draw, no cached spare,
// so the stream position stays a pure function of the draw count).
inline double standard_normal(SplitMix64& g) {
  const double u1 = 1.0 - uniform01(g);  // (0, 1]
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Index drawn with probability weights[i] / sum(weights); weights >= 0.
inline std::size_t sample_index(SplitMix64& g,
                                const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(g) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace polypin
