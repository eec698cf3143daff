#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ael {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error hierarchy. InputError: caller passed invalid data. ContractError:
// an API precondition was violated (bug in the caller). SolverError: an
// iteration failed to converge; carries diagnostics. DegenerateError:
// the input is valid but statistically degenerate (zero variance,
// rank-deficient covariance). ReliabilityError: a resampling estimate had
// too few usable replicates to be trusted.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : Error {
  using Error::Error;
};
struct ContractError : Error {
  using Error::Error;
};
struct DegenerateError : Error {
  using Error::Error;
};
struct ReliabilityError : Error {
  ReliabilityError(const std::string& msg, int usable_, int total_)
      : Error(msg), usable(usable_), total(total_) {}
  int usable = 0;
  int total = 0;
};

enum class DualStatus { Converged, Infeasible, MaxIterations };

// Solution of the inner Lagrange-multiplier problem for one score matrix.
// residual_norm is the infinity norm of the estimating-equation residual
// sum_i g_i / (1 + lambda^T g_i), measured on column-normalized scores.
struct DualSolution {
  Vector lambda;
  DualStatus status = DualStatus::MaxIterations;
  double residual_norm = kInf;
  int iterations = 0;
};

struct SolverError : Error {
  SolverError(const std::string& msg, DualSolution dual_)
      : Error(msg), dual(std::move(dual_)) {}
  DualSolution dual;
};

// Log-likelihood-ratio value. log_ratio is +inf exactly when the dual is
// infeasible (zero outside the convex hull of the score rows).
struct ELValue {
  double log_ratio = kInf;
  DualSolution dual;

  bool finite() const { return status() != DualStatus::Infeasible; }
  DualStatus status() const { return dual.status; }
};

// Pseudo-observation recipe. Single appends -a * gbar; Double appends
// -a1 * gbar then +a2 * gbar. trim_count rows of largest Euclidean norm
// are excluded when forming the anchor mean gbar (rows themselves stay).
// anchor_exclude pins the excluded rows instead, for profile statistics
// where the outlying observations are identified once per data set.
struct Adjustment {
  enum class Kind { None, Single, Double };

  Kind kind = Kind::None;
  double a1 = 0.0;
  double a2 = 0.0;
  int trim_count = 0;
  std::vector<int> anchor_exclude;

  static Adjustment none() { return {}; }
  static Adjustment single(double a, int trim = 0) {
    if (!(a > 0.0)) throw InputError("adjustment level must be positive");
    return {Kind::Single, a, 0.0, trim, {}};
  }
  static Adjustment two_point(double a1, double a2, int trim = 0) {
    if (!(a1 > 0.0) || !(a2 > 0.0))
      throw InputError("both adjustment levels must be positive");
    return {Kind::Double, a1, a2, trim, {}};
  }
  Adjustment with_fixed_anchor(std::vector<int> excluded) const {
    Adjustment out = *this;
    out.trim_count = 0;
    out.anchor_exclude = std::move(excluded);
    return out;
  }
};

}  // namespace ael
