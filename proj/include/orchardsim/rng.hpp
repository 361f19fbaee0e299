#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace orchardsim {

/// SplitMix64 finalizer; used to derive substream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over the bytes of `name`.
std::uint64_t fnv1a64(std::string_view name);

/// Seed of the named substream `index` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

/// Deterministic random source. The engine is std::mt19937_64 (fully
/// specified by the standard); the distributions below are written out
/// because the standard library's distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent stream for (seed, name, index), e.g. ("tree", 3).
  static Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    return Rng(derive_seed(seed, name, index));
  }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal via Box–Muller (one value per call).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Poisson-distributed count (Knuth's product method; fine for small means).
  int poisson(double mean);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace orchardsim
