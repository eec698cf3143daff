#include "ael/models.h"
#include "ael/rng.h"

#include <doctest.h>

#include <cmath>

using namespace ael;

TEST_CASE("mean model scores") {
  const EstimatingFunction gee = mean_model(1);
  Matrix x(3, 1);
  x << 1.0, 2.0, 3.0;
  const Matrix g = gee(x, Vector::Constant(1, 2.0));
  CHECK(g(0, 0) == doctest::Approx(-1.0));
  CHECK(g(1, 0) == doctest::Approx(0.0));
  CHECK(g(2, 0) == doctest::Approx(1.0));

  const Vector mean = *gee.closed_form_estimate(x);
  CHECK(gee(x, mean).colwise().mean().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mean model in two dimensions") {
  const EstimatingFunction gee = mean_model(2);
  Matrix x(1, 2);
  x << 1.0, 4.0;
  const Matrix g = gee(x, Vector::Zero(2));
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(0, 1) == doctest::Approx(4.0));
  CHECK_THROWS_AS(gee(Matrix::Zero(3, 3), Vector::Zero(2)), InputError);
  CHECK_THROWS_AS(gee(x, Vector::Zero(3)), InputError);
}

TEST_CASE("regression scores") {
  Matrix design(2, 2);
  design << 1.0, 0.0, 1.0, 2.0;
  const EstimatingFunction gee = linreg_model(design);

  SUBCASE("zero residual gives zero score") {
    Matrix y(2, 1);
    y << 2.0, 1.0;  // first row: x = (1, 0), beta = (2, 1) -> residual 0
    Vector beta(2);
    beta << 2.0, 1.0;
    const Matrix g = gee(y, beta);
    CHECK(g(0, 0) == doctest::Approx(0.0));
    CHECK(g(0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("unit residual reproduces the design row") {
    Matrix y(2, 1);
    y << 0.0, 1.0;  // second row: x = (1, 2), beta = 0 -> residual 1
    const Matrix g = gee(y, Vector::Zero(2));
    CHECK(g(1, 0) == doctest::Approx(1.0));
    CHECK(g(1, 1) == doctest::Approx(2.0));
  }
  SUBCASE("least squares zeroes the score means") {
    Rng rng(5);
    Matrix big(40, 2);
    for (int i = 0; i < 40; ++i) {
      big(i, 0) = rng.normal();
      big(i, 1) = rng.normal();
    }
    const EstimatingFunction wide = linreg_model(big);
    Matrix y(40, 1);
    for (int i = 0; i < 40; ++i) y(i, 0) = rng.normal();
    const Vector ols = *wide.closed_form_estimate(y);
    CHECK(wide(y, ols).colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(gee(Matrix::Zero(3, 1), Vector::Zero(2)), InputError);
    Matrix collinear(3, 2);
    collinear << 1.0, 2.0, 2.0, 4.0, 3.0, 6.0;
    CHECK_THROWS_AS(linreg_model(collinear), InputError);
  }
}

TEST_CASE("asset scores at the origin") {
  const EstimatingFunction gee = asset_model(2);
  Matrix x = Matrix::Zero(1, 2);
  for (double theta : {-1.0, 0.0, 3.0}) {
    const Matrix g = gee(x, Vector::Constant(1, theta));
    CHECK(g(0, 0) == doctest::Approx(std::exp(-0.72) - 1.0).epsilon(1e-9));
    CHECK(g(0, 0) == doctest::Approx(-0.513248).epsilon(1e-5));
    CHECK(g(0, 1) == doctest::Approx(0.0));
  }
}

TEST_CASE("asset third coordinate vanishes at X3 = 1") {
  const EstimatingFunction gee = asset_model(3);
  Matrix x(1, 3);
  x << 0.3, -0.2, 1.0;
  const Matrix g = gee(x, Vector::Constant(1, 2.0));
  CHECK(g(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("asset overflow is clipped and flagged") {
  const EstimatingFunction gee = asset_model(2);
  Matrix x(1, 2);
  x << -400.0, 0.0;
  bool overflow = false;
  const Matrix g = gee(x, Vector::Constant(1, 3.0), &overflow);
  CHECK(overflow);
  CHECK(std::isfinite(g(0, 0)));
}

TEST_CASE("asset first moment vanishes at the true parameter") {
  // E exp(-0.72 - 3 X1) = exp(-0.72 + 9 * 0.16 / 2) = 1 for X1 ~ N(0, 0.16).
  Rng rng(2718);
  const EstimatingFunction gee = asset_model(2);
  const int draws = 400000;
  Matrix x(draws, 2);
  for (int i = 0; i < draws; ++i) {
    x(i, 0) = rng.normal(0.0, 0.4);
    x(i, 1) = rng.normal(0.0, 0.4);
  }
  const Matrix g = gee(x, Vector::Constant(1, 3.0));
  const double mean = g.col(0).mean();
  const double sd = std::sqrt((g.col(0).array() - mean).square().mean());
  CHECK(std::fabs(mean) < 4.0 * sd / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("linear models are affine along the parameter") {
  Rng rng(31);
  Matrix design(15, 2);
  for (int i = 0; i < 15; ++i) {
    design(i, 0) = rng.normal();
    design(i, 1) = rng.normal();
  }
  const EstimatingFunction gee = linreg_model(design);
  Matrix y(15, 1);
  for (int i = 0; i < 15; ++i) y(i, 0) = rng.normal();
  Vector t1(2), t2(2);
  t1 << 0.5, -1.0;
  t2 << -2.0, 3.0;
  const Matrix mid = gee(y, 0.5 * (t1 + t2));
  const Matrix avg = 0.5 * (gee(y, t1) + gee(y, t2));
  CHECK((mid - avg).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("evaluation commutes with row concatenation") {
  Rng rng(41);
  const EstimatingFunction gee = mean_model(2);
  Matrix a(6, 2), b(4, 2);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = rng.normal();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) b(i, j) = rng.normal();
  Vector theta(2);
  theta << 0.3, -0.4;
  Matrix stacked(10, 2);
  stacked << a, b;
  Matrix expected(10, 2);
  expected << gee(a, theta), gee(b, theta);
  CHECK((gee(stacked, theta) - expected).cwiseAbs().maxCoeff() == 0.0);
}
