#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "psyprobe/stats_math.hpp"

using namespace psyprobe;

TEST_CASE("sigmoid and log_sigmoid") {
  CHECK(stats::sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(stats::sigmoid(700.0) == doctest::Approx(1.0));
  CHECK(stats::sigmoid(-700.0) == doctest::Approx(0.0));
  // stable tails: log sigmoid(-x) ~ -x
  CHECK(stats::log_sigmoid(-800.0) == doctest::Approx(-800.0));
  CHECK(stats::log_sigmoid(800.0) == doctest::Approx(0.0));
  for (double x : {-5.0, -1.0, 0.0, 0.3, 2.0, 10.0}) {
    CHECK(stats::log_sigmoid(x) ==
          doctest::Approx(std::log(stats::sigmoid(x))).epsilon(1e-12));
  }
}

TEST_CASE("normal cdf/quantile round trip") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
  // quantile at 0.75 must be accurate to ~1e-12; reference is the erfc-based
  // cdf itself (Halley-refined inverse)
  const double q75 = stats::normal_quantile(0.75);
  CHECK(std::fabs(stats::normal_cdf(q75) - 0.75) < 1e-14);
  CHECK(q75 == doctest::Approx(0.6744897501960817).epsilon(1e-12));
  for (double p = 0.001; p < 1.0; p += 0.037) {
    CHECK(std::fabs(stats::normal_cdf(stats::normal_quantile(p)) - p) < 1e-13);
  }
}

TEST_CASE("log_normal_cdf deep tail matches the identity region") {
  // direct log at the boundary of the asymptotic branch
  for (double x : {-7.9, -7.0, -5.0, -2.0, 0.0, 3.0}) {
    CHECK(stats::log_normal_cdf(x) ==
          doctest::Approx(std::log(stats::normal_cdf(x))).epsilon(1e-10));
  }
  // tail values stay finite and ordered
  double prev = stats::log_normal_cdf(-40.0);
  CHECK(std::isfinite(prev));
  for (double x = -39.0; x <= -8.0; x += 1.0) {
    const double cur = stats::log_normal_cdf(x);
    CHECK(cur > prev);
    prev = cur;
  }
  // continuity across the branch switch at -8
  CHECK(stats::log_normal_cdf(-8.0000001) ==
        doctest::Approx(stats::log_normal_cdf(-7.9999999)).epsilon(1e-6));
}

TEST_CASE("chi-square survival function against closed forms") {
  // dof 2: sf(x) = exp(-x/2) exactly
  for (double x : {0.5, 1.0, 3.0, 8.0}) {
    CHECK(stats::chi_square_sf(x, 2) == doctest::Approx(std::exp(-0.5 * x)).epsilon(1e-12));
  }
  // dof 4: sf(x) = (1 + x/2) exp(-x/2)
  for (double x : {0.5, 2.0, 7.0}) {
    CHECK(stats::chi_square_sf(x, 4) ==
          doctest::Approx((1.0 + 0.5 * x) * std::exp(-0.5 * x)).epsilon(1e-12));
  }
}

TEST_CASE("student t two-sided p-value") {
  // dof 1 is Cauchy: p = 1 - (2/pi) atan(|t|)
  for (double t : {0.5, 1.0, 2.0, 10.0}) {
    const double expected = 1.0 - 2.0 / M_PI * std::atan(t);
    CHECK(stats::student_t_two_sided_p(t, 1.0) == doctest::Approx(expected).epsilon(1e-10));
  }
  CHECK(stats::student_t_two_sided_p(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  // large dof approaches the normal two-sided value
  CHECK(stats::student_t_two_sided_p(1.959963985, 1e7) == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("regularized beta basics") {
  CHECK(stats::regularized_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(stats::regularized_beta(1.0, 2.0, 3.0) == 1.0);
  // I_x(1, 1) = x
  for (double x = 0.1; x < 1.0; x += 0.2) {
    CHECK(stats::regularized_beta(x, 1.0, 1.0) == doctest::Approx(x).epsilon(1e-12));
  }
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
  CHECK(stats::regularized_beta(0.3, 2.5, 4.0) ==
        doctest::Approx(1.0 - stats::regularized_beta(0.7, 4.0, 2.5)).epsilon(1e-12));
}
