#pragma once

#include <cstdint>
#include <random>

namespace bmrsw {

/// Purpose tag mixed into derived seeds so that no two random streams of a
/// run (resampling, noise banks, optimizer, contamination, ...) can collide.
enum class StreamPurpose : std::uint64_t {
  Resample = 1,
  NoiseBank = 2,
  Optimizer = 3,
  Contamination = 4,
  ModelNoise = 5,
  SelectionResample = 6,
  SelectionNoiseBank = 7,
  SelectionOptimizer = 8,
  Replicate = 9,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Pure function of (master seed, stream index, purpose). Every random
/// stream in the pipeline is seeded through here, which is what makes
/// results independent of worker count and reproducible across runs.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    StreamPurpose purpose) {
  std::uint64_t s = splitmix64(master ^ splitmix64(index + 0x51ed2701ULL));
  return splitmix64(s ^ splitmix64(static_cast<std::uint64_t>(purpose) + 0xabcd1234ULL));
}

/// Seeded generator wrapping std::mt19937_64 (whose output sequence is fixed
/// by the standard) with explicit samplers, since the distributions in
/// <random> are not bit-reproducible across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform01_open_left() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (two uniforms per pair, one cached).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape boosting below 1.
  double gamma(double shape);

  /// Chi-squared with nu degrees of freedom.
  double chi_squared(double nu) { return 2.0 * gamma(0.5 * nu); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace bmrsw
