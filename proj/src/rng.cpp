#include "psyprobe/rng.hpp"

#include <cmath>

namespace psyprobe {

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // Box-Muller without the cached second variate, to keep the call sequence
  // stateless and reproducible.
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int Rng::poisson(double lambda) {
  double p = std::exp(-lambda);
  double cdf = p;
  const double u = uniform();
  int k = 0;
  while (u >= cdf) {
    ++k;
    p *= lambda / k;
    cdf += p;
    if (k > 10000) break;  // unreachable for sane lambda
  }
  return k;
}

}  // namespace psyprobe
