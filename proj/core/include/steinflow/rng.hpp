#pragma once

#include <cstdint>
#include <random>

namespace steinflow {

/// SplitMix64 finalizer; used to turn user seeds (and seed ^ replicate)
/// into well-mixed engine seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded 64-bit generator with a fixed normal transform (Box-Muller) so
/// draws do not depend on the standard library's distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace steinflow
