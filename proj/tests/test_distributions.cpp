#include "ael/distributions.h"
#include "ael/types.h"

#include "oracles.h"

#include <doctest.h>

#include <cmath>

using namespace ael;

TEST_CASE("chi-square quantiles") {
  CHECK(chi2_quantile(0.5, 1) == doctest::Approx(0.4549).epsilon(5e-4));
  CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.84146).epsilon(1e-5));
  CHECK(chi2_quantile(1e-12, 1) < 1e-10);  // support boundary
  CHECK_THROWS_AS(chi2_quantile(0.0, 1), InputError);
  CHECK_THROWS_AS(chi2_quantile(1.0, 1), InputError);
}

TEST_CASE("chi-square quantiles match the quadrature oracle") {
  for (int df : {1, 2, 3, 7}) {
    for (double p : {0.05, 0.5, 0.9, 0.95, 0.99}) {
      const double ours = chi2_quantile(p, df);
      const double oracle = oracles::quantile_of(
          [df](double x) { return oracles::quad_chi2_cdf(x, df); }, p);
      CHECK(ours == doctest::Approx(oracle).epsilon(1e-7));
    }
  }
}

TEST_CASE("F quantiles") {
  CHECK(f_quantile(0.5, 1, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f_quantile(0.5, 7, 7) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f_quantile(0.95, 1, 19) == doctest::Approx(4.3807).epsilon(1e-4));
  CHECK_THROWS_AS(f_quantile(0.95, 0, 3), InputError);
}

TEST_CASE("F quantiles match the quadrature oracle") {
  for (auto [d1, d2] : {std::pair{1, 19}, {2, 28}, {3, 47}}) {
    for (double p : {0.5, 0.9, 0.95}) {
      const double ours = f_quantile(p, d1, d2);
      const double oracle = oracles::quantile_of(
          [d1, d2](double x) { return oracles::quad_f_cdf(x, d1, d2); }, p);
      CHECK(ours == doctest::Approx(oracle).epsilon(1e-6));
    }
  }
}

TEST_CASE("CDF and quantile invert each other") {
  for (double p : {0.01, 0.2, 0.5, 0.8, 0.99}) {
    CHECK(chi2_cdf(chi2_quantile(p, 3), 3) == doctest::Approx(p).epsilon(1e-9));
    CHECK(f_cdf(f_quantile(p, 2, 11), 2, 11) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("normal quantile basics") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(normal_quantile(0.75) * normal_quantile(0.75) ==
        doctest::Approx(chi2_quantile(0.5, 1)).epsilon(1e-9));
  const double far = normal_quantile(1e-10);
  CHECK(0.5 * std::erfc(-far / std::sqrt(2.0)) ==
        doctest::Approx(1e-10).epsilon(1e-6));
}
