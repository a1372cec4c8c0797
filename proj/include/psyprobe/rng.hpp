#pragma once

#include <cstdint>
#include <random>

namespace psyprobe {

// Deterministic random source used everywhere seeds appear. Distributions are
// derived from the raw mt19937_64 stream by hand so output bytes do not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1) with 53-bit resolution
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n), n > 0; rejection sampling avoids modulo bias
  std::uint64_t below(std::uint64_t n);

  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // inversion by sequential search; intended for small lambda
  int poisson(double lambda);

 private:
  std::mt19937_64 engine_;
};

}  // namespace psyprobe
