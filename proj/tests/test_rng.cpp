#include "ael/populations.h"
#include "ael/rng.h"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace ael;

namespace {

struct MomentCheck {
  double mean, var, skew, kurt;  // population values; kurt is the 4th
                                 // standardized moment
};

// First four sample moments against analytic values, four standard errors.
void check_moments(const std::function<double(Rng&)>& sampler,
                   const MomentCheck& want, int draws, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(draws);
  for (int i = 0; i < draws; ++i) x[i] = sampler(rng);

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= draws;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= draws;
  m3 /= draws;
  m4 /= draws;

  auto se_of = [&](int order) {
    // Rough standard error of the order-th central moment estimate.
    double s = 0.0;
    for (double v : x) s += std::pow(std::fabs(v - mean), 2.0 * order);
    return std::sqrt(s / draws / draws) + 1e-12;
  };
  CHECK(std::fabs(mean - want.mean) < 4.0 * std::sqrt(m2 / draws));
  CHECK(std::fabs(m2 - want.var) < 4.0 * se_of(2));
  const double sd = std::sqrt(want.var);
  CHECK(std::fabs(m3 - want.skew * sd * sd * sd) < 4.0 * se_of(3));
  CHECK(std::fabs(m4 - want.kurt * want.var * want.var) < 4.0 * se_of(4));
}

}  // namespace

TEST_CASE("streams are reproducible and tag-separated") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng s1 = Rng::stream(7, {1, 2, 3});
  Rng s2 = Rng::stream(7, {1, 2, 3});
  Rng s3 = Rng::stream(7, {1, 2, 4});
  CHECK(s1.next_u64() == s2.next_u64());
  CHECK(s1.next_u64() != s3.next_u64());
}

TEST_CASE("uniform draws stay strictly inside the unit interval") {
  Rng rng(9);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("integer draws are bounded and near-uniform") {
  Rng rng(10);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::fabs(c - 10000.0) < 500.0);
}

TEST_CASE("sampler marginals match analytic moments") {
  const int draws = 400000;
  check_moments([](Rng& r) { return r.normal(); }, {0.0, 1.0, 0.0, 3.0}, draws, 1);
  check_moments([](Rng& r) { return r.exponential(1.0); }, {1.0, 1.0, 2.0, 9.0},
                draws, 2);
  // Gamma(k, s): var k s^2, skew 2/sqrt(k), kurt 3 + 6/k.
  check_moments([](Rng& r) { return r.gamma(0.6, 1.0); },
                {0.6, 0.6, 2.0 / std::sqrt(0.6), 3.0 + 10.0}, draws, 3);
  check_moments([](Rng& r) { return r.gamma(2.5, 2.0); },
                {5.0, 10.0, 2.0 / std::sqrt(2.5), 3.0 + 2.4}, draws, 4);
  // chi-square(1.5) = Gamma(0.75, 2).
  check_moments([](Rng& r) { return r.chi_square(1.5); },
                {1.5, 3.0, 2.0 / std::sqrt(0.75), 3.0 + 8.0}, draws, 5);
  // Poisson(1.3): central moments 1.3, 1.3, 1.3 + 3 * 1.69.
  check_moments([](Rng& r) { return static_cast<double>(r.poisson(1.3)); },
                {1.3, 1.3, 1.0 / std::sqrt(1.3), 3.0 + 1.0 / 1.3}, draws, 6);
}

TEST_CASE("mixture population mean and variance") {
  const MixturePop pop;
  const auto m = univariate_moments(pop);
  REQUIRE(m);
  CHECK(m->alpha2 == doctest::Approx(7.25));
  CHECK(true_theta(PopulationSpec{pop})[0] == doctest::Approx(0.0));

  Rng rng(77);
  const Matrix x = draw(pop, 200000, rng);
  const double mean = x.col(0).mean();
  CHECK(std::fabs(mean) < 4.0 * std::sqrt(7.25 / 200000.0));
  const double var = (x.col(0).array() - mean).square().mean();
  CHECK(var == doctest::Approx(7.25).epsilon(0.05));
}

TEST_CASE("population factors in closed form") {
  CHECK(closed_form_b(NormalPop{})->b == doctest::Approx(1.5));
  CHECK(closed_form_b(ExponentialPop{})->b == doctest::Approx(19.0 / 6.0).epsilon(1e-12));
  CHECK(closed_form_b(ChiSquarePop{1.0})->b == doctest::Approx(29.0 / 6.0).epsilon(1e-12));
  CHECK(closed_form_b(MixturePop{})->b == doctest::Approx(1.1124).epsilon(2e-3));
  CHECK_FALSE(closed_form_b(AssetPop{2}).has_value());
}

TEST_CASE("latent configurations: means and tower-property checks") {
  CHECK(true_theta(PopulationSpec{LatentDPop{'a', 2}})[1] ==
        doctest::Approx(std::log(2.0)));
  CHECK(true_theta(PopulationSpec{LatentDPop{'d', 3}})[0] == doctest::Approx(1.5));
  CHECK(true_theta(PopulationSpec{LatentDPop{'d', 3}})[2] == doctest::Approx(2.5));

  Rng rng(123);
  const int n = 150000;
  const Matrix x = draw(LatentDPop{'d', 3}, n, rng);
  // E X1 = E D = 1.5 by the tower property.
  CHECK(x.col(0).mean() == doctest::Approx(1.5).epsilon(0.02));
  CHECK(x.col(1).mean() == doctest::Approx(std::log(2.0)).epsilon(0.03));

  const Matrix xa = draw(LatentDPop{'a', 3}, n, rng);
  CHECK(std::fabs(xa.col(0).mean()) < 0.03);
  CHECK(xa.col(2).mean() == doctest::Approx(1.5).epsilon(0.03));
}

TEST_CASE("latent oracle reproduces the published factors") {
  // q = 2 configuration (a): b = 3.21; q = 3 configuration (d): b = 2.67.
  const BartlettEstimate a2 = latent_oracle_b(LatentDPop{'a', 2}, 400000, 2024);
  CHECK(a2.b == doctest::Approx(3.21).epsilon(0.10));
  CHECK(a2.b1 - a2.b2 == doctest::Approx(a2.b).epsilon(1e-12));

  const BartlettEstimate d3 = latent_oracle_b(LatentDPop{'d', 3}, 400000, 2024);
  CHECK(d3.b == doctest::Approx(2.67).epsilon(0.10));
}

TEST_CASE("regression factor from a hand-checkable design") {
  // Rows alternate (1, 0) / (0, 1): all cross moments vanish, so the
  // factor has a short closed form: 3 for normal errors, 19/3 for the
  // centered exponential.
  Matrix design(10, 2);
  for (int i = 0; i < 10; ++i) {
    design(i, 0) = (i % 2 == 0) ? 1.0 : 0.0;
    design(i, 1) = (i % 2 == 0) ? 0.0 : 1.0;
  }
  CHECK(linreg_design_b(design, true).b == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(linreg_design_b(design, false).b ==
        doctest::Approx(19.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("error draws for the regression population") {
  Rng rng(55);
  const LinRegPop pop{Vector::Ones(2), false};
  const Matrix eps = draw(pop, 100000, rng);
  CHECK(std::fabs(eps.col(0).mean()) < 0.02);  // centered exponential
  CHECK((eps.col(0).array() - eps.col(0).mean()).square().mean() ==
        doctest::Approx(1.0).epsilon(0.05));
}
