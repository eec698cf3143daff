#pragma once

#include "ael/el.h"
#include "ael/models.h"
#include "ael/types.h"

#include <cstdint>
#include <optional>
#include <string>

namespace ael {

enum class MethodKind { EL, BEL, AEL, Hotelling, FTest, AEL0 };

// Where the Bartlett factor for BEL/AEL scaling comes from.
struct BSource {
  enum class Kind { None, Theoretical, NaiveMoment, BiasReduced, Bootstrap };

  Kind kind = Kind::None;
  // Theoretical values; b1/b2 optional (needed for the two-point rule).
  double b = 0.0;
  std::optional<double> b1;
  std::optional<double> b2;
  int bootstrap_B = 300;

  static BSource none() { return {}; }
  static BSource theoretical(double b, std::optional<double> b1 = std::nullopt,
                             std::optional<double> b2 = std::nullopt) {
    return {Kind::Theoretical, b, b1, b2, 0};
  }
  static BSource naive_moment() { return {Kind::NaiveMoment, 0, {}, {}, 0}; }
  static BSource bias_reduced() { return {Kind::BiasReduced, 0, {}, {}, 0}; }
  static BSource bootstrap(int B) { return {Kind::Bootstrap, 0, {}, {}, B}; }
};

struct MethodSpec {
  MethodKind kind = MethodKind::EL;
  BSource b_source;
  int trim_count = 0;
  // R (1 - b/n) instead of the robust division form R / (1 + b/n).
  bool multiplicative_bel = false;
  // Stream for bootstrap b sources; ignored otherwise.
  std::uint64_t bootstrap_seed = 0;
};

struct IntervalResult {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  MethodSpec method;
};

// Resolved Bartlett factor at the maximum-AEL estimate theta_hat, together
// with the pseudo-observation recipe it implies. Exposed for tests and the
// simulation engine (which reuses one resolution across methods).
struct ResolvedAdjustment {
  double b = 0.0;
  std::optional<double> b1;
  std::optional<double> b2;
  Adjustment adjustment;  // two-point when components are available
};
ResolvedAdjustment resolve_adjustment(const MatrixRef& scores_at_hat,
                                      const BSource& source, int trim_count,
                                      const MatrixRef& sample,
                                      const EstimatingFunction& gee,
                                      const VectorRef& theta_hat,
                                      std::uint64_t bootstrap_seed);

// The method's scalar statistic at theta0 (chi-square(q) scale for the
// EL family). +inf signals an empty constraint set. Hotelling and FTest
// statistics live in their dedicated cover functions.
double el_statistic(const MatrixRef& sample, const EstimatingFunction& gee,
                    const VectorRef& theta0, const MethodSpec& method);

// Profile statistic R(theta0; adj) - inf_theta R(theta; adj), clamped at 0.
double delta_statistic(const MatrixRef& sample, const EstimatingFunction& gee,
                       const VectorRef& theta0, const Adjustment& adj,
                       std::optional<Vector> theta_init = std::nullopt);

// Minimizer of theta -> R(theta; adj). Closed-form optimum when the model
// provides one; otherwise golden-section (p = 1) or coordinate descent.
Vector max_el_estimate(const MatrixRef& sample, const EstimatingFunction& gee,
                       const Adjustment& adj, const VectorRef& theta_init);

// Scalar-parameter confidence interval by outward bracketing plus bisection
// on statistic(theta) - cutoff.
IntervalResult confidence_interval(const MatrixRef& sample,
                                   const EstimatingFunction& gee,
                                   const MethodSpec& method, double level);

// Classical baselines with exact F calibration.
bool hotelling_covers(const MatrixRef& sample, const VectorRef& theta0,
                      double level);
bool ftest_covers(const MatrixRef& responses, const MatrixRef& design,
                  const VectorRef& beta0, double level);

// Conventional adjustment level max(1, log(n) / 2).
double conventional_level(Eigen::Index n);

}  // namespace ael
