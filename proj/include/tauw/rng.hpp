#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "tauw/errors.hpp"

namespace tauw {

/// SplitMix64 step; used to derive well-dispersed substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seedable generator with portable draw helpers. std::mt19937_64 output is
/// specified by the standard, and all distributions here are implemented by
/// hand, so identical seeds produce identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent substream for (tag, index), e.g. one per series.
  static Rng substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(seed ^ splitmix64(tag)) + index));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n). Multiply-high reduction; the bias of
  /// n / 2^64 is far below anything our statistics can detect.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw DomainError("Rng::below: n must be positive");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  /// Index drawn proportionally to the given non-negative weights.
  int weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw DomainError("Rng::weighted: weights must sum to a positive value");
    double r = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size() - 1);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tauw
