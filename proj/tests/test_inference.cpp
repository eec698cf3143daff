#include "ael/inference.h"

#include "ael/bartlett.h"
#include "ael/distributions.h"
#include "ael/rng.h"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace ael;

namespace {

Matrix scalar_sample(Rng& rng, int n, double shift = 0.0) {
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = rng.normal() + shift;
  return x;
}

}  // namespace

TEST_CASE("plain statistic vanishes at the sample mean") {
  Rng rng(1);
  const Matrix x = scalar_sample(rng, 20);
  const EstimatingFunction gee = mean_model(1);
  MethodSpec spec;
  spec.kind = MethodKind::EL;
  const Vector mean = *gee.closed_form_estimate(x);
  CHECK(el_statistic(x, gee, mean, spec) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("scaled statistic arithmetic") {
  Rng rng(2);
  const Matrix x = scalar_sample(rng, 20, 0.4);
  const EstimatingFunction gee = mean_model(1);
  const Vector theta0 = Vector::Zero(1);

  MethodSpec plain;
  plain.kind = MethodKind::EL;
  const double r = el_statistic(x, gee, theta0, plain);
  REQUIRE(std::isfinite(r));

  MethodSpec scaled;
  scaled.kind = MethodKind::BEL;
  scaled.b_source = BSource::theoretical(1.5);
  CHECK(el_statistic(x, gee, theta0, scaled) ==
        doctest::Approx(r / (1.0 + 1.5 / 20.0)).epsilon(1e-12));

  // Hand arithmetic for R = 4, b = 1.5, n = 20.
  CHECK(4.0 / (1.0 + 1.5 / 20.0) == doctest::Approx(3.7209).epsilon(1e-4));

  scaled.multiplicative_bel = true;
  CHECK(el_statistic(x, gee, theta0, scaled) ==
        doctest::Approx(r * (1.0 - 1.5 / 20.0)).epsilon(1e-12));
}

TEST_CASE("missing factor source is a contract violation") {
  Rng rng(3);
  const Matrix x = scalar_sample(rng, 15);
  const EstimatingFunction gee = mean_model(1);
  MethodSpec spec;
  spec.kind = MethodKind::BEL;
  CHECK_THROWS_AS(el_statistic(x, gee, Vector::Zero(1), spec), ContractError);
}

TEST_CASE("adjusted statistic equals the explicit pseudo-observation path") {
  Rng rng(4);
  const Matrix x = scalar_sample(rng, 25, 0.3);
  const EstimatingFunction gee = mean_model(1);
  const Vector theta0 = Vector::Zero(1);

  MethodSpec spec;
  spec.kind = MethodKind::AEL;
  spec.b_source = BSource::naive_moment();
  const double stat = el_statistic(x, gee, theta0, spec);

  const Vector mean = *gee.closed_form_estimate(x);
  const double b = naive_moment_univariate(gee(x, mean).col(0)).b;
  REQUIRE(b > 0.0);
  const double direct =
      ael_log_ratio(gee(x, theta0), Adjustment::single(0.5 * b)).log_ratio;
  CHECK(stat == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("conventional adjustment level") {
  CHECK(conventional_level(3) == doctest::Approx(1.0));  // log(3)/2 < 1
  CHECK(conventional_level(100) == doctest::Approx(0.5 * std::log(100.0)));
  Rng rng(5);
  const Matrix x = scalar_sample(rng, 30, 1.0);
  const EstimatingFunction gee = mean_model(1);
  MethodSpec spec;
  spec.kind = MethodKind::AEL0;
  const double stat = el_statistic(x, gee, Vector::Zero(1), spec);
  const double direct =
      ael_log_ratio(gee(x, Vector::Zero(1)),
                    Adjustment::single(conventional_level(30)))
          .log_ratio;
  CHECK(stat == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("adjustment resolution rules") {
  Rng rng(6);
  const Matrix x = scalar_sample(rng, 30, 0.2);
  const EstimatingFunction gee = mean_model(1);
  const Vector mean = *gee.closed_form_estimate(x);
  const Matrix g_hat = gee(x, mean);

  SUBCASE("positive scalar factor: one pseudo-observation at b/2") {
    const ResolvedAdjustment res = resolve_adjustment(
        g_hat, BSource::theoretical(3.0), 0, x, gee, mean, 0);
    CHECK(res.adjustment.kind == Adjustment::Kind::Single);
    CHECK(res.adjustment.a1 == doctest::Approx(1.5));
  }
  SUBCASE("nonpositive scalar factor falls back to two points") {
    const ResolvedAdjustment res = resolve_adjustment(
        g_hat, BSource::theoretical(-4.0), 0, x, gee, mean, 0);
    CHECK(res.adjustment.kind == Adjustment::Kind::Double);
    CHECK(res.adjustment.a1 > 0.0);
    CHECK(res.adjustment.a2 > 0.0);
    CHECK(res.adjustment.a1 - res.adjustment.a2 == doctest::Approx(-2.0));
  }
  SUBCASE("component split: two pseudo-observations at b1/2, b2/2") {
    Rng rng2(7);
    Matrix y(40, 2);
    for (int i = 0; i < 40; ++i) {
      y(i, 0) = rng2.chi_square(1.0);
      y(i, 1) = rng2.normal();
    }
    const EstimatingFunction gee2 = mean_model(2);
    const Vector mean2 = *gee2.closed_form_estimate(y);
    const ResolvedAdjustment res = resolve_adjustment(
        gee2(y, mean2), BSource::bias_reduced(), 0, y, gee2, mean2, 0);
    REQUIRE(res.b1);
    REQUIRE(res.b2);
    if (*res.b1 > 0.0 && *res.b2 > 0.0) {
      CHECK(res.adjustment.kind == Adjustment::Kind::Double);
      CHECK(res.adjustment.a1 == doctest::Approx(0.5 * *res.b1));
      CHECK(res.adjustment.a2 == doctest::Approx(0.5 * *res.b2));
    }
  }
}

TEST_CASE("profile statistic of a just-identified model") {
  Rng rng(8);
  const Matrix x = scalar_sample(rng, 20, 0.5);
  const EstimatingFunction gee = mean_model(1);
  const Vector theta0 = Vector::Zero(1);
  const double r = el_log_ratio(gee(x, theta0)).log_ratio;
  CHECK(delta_statistic(x, gee, theta0, Adjustment::none()) ==
        doctest::Approx(r).epsilon(1e-12));
  const Vector mean = *gee.closed_form_estimate(x);
  CHECK(delta_statistic(x, gee, mean, Adjustment::none()) == 0.0);
}

TEST_CASE("profile statistic of the asset model is nonnegative and finite") {
  Rng rng(9);
  Matrix sample(60, 2);
  for (int i = 0; i < 60; ++i) {
    sample(i, 0) = rng.normal(0.0, 0.4);
    sample(i, 1) = rng.normal(0.0, 0.4);
  }
  const EstimatingFunction gee = asset_model(2);
  const double d =
      delta_statistic(sample, gee, Vector::Constant(1, 3.0), Adjustment::none());
  CHECK(d >= 0.0);
  const double d_adj = delta_statistic(sample, gee, Vector::Constant(1, 3.0),
                                       Adjustment::single(2.0, 5));
  CHECK(d_adj >= 0.0);
  CHECK(std::isfinite(d_adj));
}

TEST_CASE("maximum-likelihood estimates") {
  Rng rng(10);
  SUBCASE("mean model returns the sample mean exactly") {
    const Matrix x = scalar_sample(rng, 15, 2.0);
    const EstimatingFunction gee = mean_model(1);
    const Vector est =
        max_el_estimate(x, gee, Adjustment::none(), Vector::Zero(1));
    CHECK(est[0] == x.col(0).mean());
    const Vector est_adj =
        max_el_estimate(x, gee, Adjustment::single(2.0), Vector::Zero(1));
    CHECK(est_adj[0] == x.col(0).mean());
  }
  SUBCASE("regression returns least squares") {
    Matrix design(25, 2);
    for (int i = 0; i < 25; ++i) {
      design(i, 0) = rng.normal();
      design(i, 1) = rng.normal();
    }
    Matrix y(25, 1);
    for (int i = 0; i < 25; ++i)
      y(i, 0) = design(i, 0) + design(i, 1) + 0.3 * rng.normal();
    const EstimatingFunction gee = linreg_model(design);
    const Vector ols = design.colPivHouseholderQr().solve(y.col(0));
    const Vector est =
        max_el_estimate(y, gee, Adjustment::none(), Vector::Zero(2));
    CHECK((est - ols).lpNorm<Eigen::Infinity>() < 1e-12);
  }
  SUBCASE("coordinate descent reaches the optimum without the closed form") {
    Matrix design(25, 2);
    for (int i = 0; i < 25; ++i) {
      design(i, 0) = rng.normal();
      design(i, 1) = rng.normal();
    }
    Matrix y(25, 1);
    for (int i = 0; i < 25; ++i)
      y(i, 0) = design(i, 0) - 0.5 * design(i, 1) + 0.3 * rng.normal();
    // Same scores as the regression model but without the shortcut.
    EstimatingFunction blind(
        2, 2,
        [design](const MatrixRef& sample, const VectorRef& beta, bool*) -> Matrix {
          Vector resid = sample.col(0) - design * beta;
          return design.array().colwise() * resid.array();
        });
    const Vector ols = design.colPivHouseholderQr().solve(y.col(0));
    const Vector est =
        max_el_estimate(y, blind, Adjustment::single(1.5), Vector::Zero(2));
    CHECK((est - ols).lpNorm<Eigen::Infinity>() < 1e-4);
  }
}

TEST_CASE("classical mean test") {
  Rng rng(11);
  const Matrix x = scalar_sample(rng, 20, 0.1);
  const Vector mean = Vector::Constant(1, x.col(0).mean());
  CHECK(hotelling_covers(x, mean, 0.5));
  CHECK(hotelling_covers(x, mean, 0.01));

  Matrix flat(5, 2);
  for (int i = 0; i < 5; ++i) {
    flat(i, 0) = i;
    flat(i, 1) = 2.0 * i;
  }
  CHECK_THROWS_AS(hotelling_covers(flat, Vector::Zero(2), 0.9), DegenerateError);
}

TEST_CASE("classical regression test") {
  Rng rng(12);
  Matrix design(30, 2);
  for (int i = 0; i < 30; ++i) {
    design(i, 0) = rng.normal();
    design(i, 1) = rng.normal();
  }
  Matrix y(30, 1);
  for (int i = 0; i < 30; ++i)
    y(i, 0) = design.row(i).sum() + rng.normal();
  const Vector ols = design.colPivHouseholderQr().solve(y.col(0));
  CHECK(ftest_covers(y, design, ols, 0.5));
  // Coverage is monotone in the level.
  if (!ftest_covers(y, design, Vector::Zero(2), 0.90))
    CHECK_FALSE(ftest_covers(y, design, Vector::Zero(2), 0.50));
}

TEST_CASE("coverage is monotone in the level") {
  Rng rng(13);
  const EstimatingFunction gee = mean_model(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = scalar_sample(rng, 20, 0.5);
    MethodSpec spec;
    spec.kind = MethodKind::EL;
    const double stat = el_statistic(x, gee, Vector::Zero(1), spec);
    bool prev = false;
    for (double level : {0.5, 0.8, 0.9, 0.95, 0.99}) {
      const bool covers = stat <= chi2_quantile(level, 1);
      if (prev) CHECK(covers);
      prev = covers;
    }
  }
}

TEST_CASE("interval endpoints sit on the cutoff and nest across levels") {
  Rng rng(14);
  const EstimatingFunction gee = mean_model(1);
  Matrix x(8, 1);
  x << -2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0;  // symmetric about zero

  MethodSpec spec;
  spec.kind = MethodKind::EL;
  const IntervalResult i90 = confidence_interval(x, gee, spec, 0.90);
  const IntervalResult i99 = confidence_interval(x, gee, spec, 0.99);
  CHECK(i90.lower < 0.0);
  CHECK(i90.upper > 0.0);
  CHECK(std::fabs(i90.lower + i90.upper) < 1e-6);
  CHECK(i99.lower < i90.lower);
  CHECK(i99.upper > i90.upper);

  const double at_upper =
      el_statistic(x, gee, Vector::Constant(1, i90.upper), spec);
  CHECK(at_upper == doctest::Approx(chi2_quantile(0.90, 1)).epsilon(1e-5));
}

TEST_CASE("classical interval matches the closed form") {
  Rng rng(15);
  const Matrix x = scalar_sample(rng, 20, 0.7);
  const EstimatingFunction gee = mean_model(1);
  MethodSpec spec;
  spec.kind = MethodKind::Hotelling;
  const IntervalResult iv = confidence_interval(x, gee, spec, 0.95);
  const double mean = x.col(0).mean();
  const double s =
      std::sqrt((x.col(0).array() - mean).square().sum() / 19.0);
  const double half =
      std::sqrt(f_quantile(0.95, 1, 19)) * s / std::sqrt(20.0);
  CHECK(iv.lower == doctest::Approx(mean - half).epsilon(1e-7));
  CHECK(iv.upper == doctest::Approx(mean + half).epsilon(1e-7));
}

TEST_CASE("scaled and adjusted statistics agree to first order") {
  // Both implement the same order-1/n correction, so the median absolute
  // difference shrinks faster than either statistic as n grows.
  Rng rng(17);
  const EstimatingFunction gee = mean_model(1);
  const double b = 19.0 / 6.0;
  auto median_diff = [&](int n) {
    std::vector<double> diffs;
    for (int rep = 0; rep < 300; ++rep) {
      Matrix x(n, 1);
      for (int i = 0; i < n; ++i) x(i, 0) = rng.exponential(1.0);
      const Matrix g0 = gee(x, Vector::Constant(1, 1.0));
      const double el = el_log_ratio(g0).log_ratio;
      if (!std::isfinite(el)) continue;
      const double bel = el / (1.0 + b / n);
      const double ael =
          ael_log_ratio(g0, Adjustment::single(0.5 * b)).log_ratio;
      diffs.push_back(std::fabs(bel - ael));
    }
    std::sort(diffs.begin(), diffs.end());
    return diffs[diffs.size() / 2];
  };
  const double m50 = median_diff(50);
  const double m800 = median_diff(800);
  CHECK(m800 < 0.5 * m50);
}

TEST_CASE("adjusted statistic stays at or below the plain one on average") {
  Rng rng(16);
  const EstimatingFunction gee = mean_model(1);
  int negative = 0, total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Matrix x(30, 1);
    for (int i = 0; i < 30; ++i) x(i, 0) = rng.exponential(1.0);
    const Matrix g0 = gee(x, Vector::Constant(1, 1.0));
    const double el = el_log_ratio(g0).log_ratio;
    if (!std::isfinite(el)) continue;
    const double ael =
        ael_log_ratio(g0, Adjustment::single(19.0 / 12.0)).log_ratio;
    ++total;
    if (ael < el) ++negative;
  }
  CHECK(total > 150);
  CHECK(negative > total / 2);  // median of (AEL - EL) is negative
}
