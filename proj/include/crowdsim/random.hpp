#pragma once

#include <cstdint>
#include <random>

namespace crowdsim {

/// Seeded generator with platform-independent real sampling.
///
/// std::uniform_real_distribution is implementation-defined, so scenario
/// generation would differ between standard libraries. Reals are built from
/// the top 53 bits of mt19937_64 instead, which is fully specified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi]; hi is reachable only up to rounding.
  double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace crowdsim
