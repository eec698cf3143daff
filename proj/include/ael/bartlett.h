#pragma once

#include "ael/models.h"
#include "ael/types.h"

#include <cstdint>
#include <map>
#include <vector>

namespace ael {

// Joint central moments m[(r,s,...,t)] = n^-1 sum_i Y_i^r Y_i^s ... Y_i^t of
// a centered score matrix, stored once per sorted multi-index.
class MomentTable {
 public:
  MomentTable(int q, int n, int max_order)
      : q_(q), n_(n), max_order_(max_order) {}

  int q() const { return q_; }
  int n() const { return n_; }
  int max_order() const { return max_order_; }

  // Indices are 1-based coordinates; order of the arguments is irrelevant.
  double at(std::vector<int> idx) const;
  void set(std::vector<int> idx, double value);
  bool contains(std::vector<int> idx) const;

 private:
  int q_;
  int n_;
  int max_order_;
  std::map<std::vector<int>, double> values_;
};

// Eigen-standardization of a score matrix: V = P diag(xi) P^T for the
// sample covariance V of the rows, Y = (G - mean) P. Eigenvalues are sorted
// descending and each eigenvector's first nonzero entry is made positive,
// so the decomposition is deterministic across runs and platforms.
struct Standardization {
  Matrix rotation;     // P, orthogonal q x q
  Vector eigenvalues;  // xi, descending
  Matrix transformed;  // Y, n x q, centered with diagonal sample covariance
};

enum class BMethod { Theoretical, Moment, BiasReduced, Bootstrap };

struct BartlettEstimate {
  double b = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  bool has_components = false;
  BMethod method = BMethod::Moment;
  int n_used = 0;
  // Bootstrap diagnostics.
  int feasible_resamples = 0;
  int dropped_resamples = 0;
};

// b = alpha4 / (2 alpha2^2) - alpha3^2 / (3 alpha2^3) from population
// central moments of a scalar score. Moment consistency (alpha4 at least
// alpha2^2, alpha2 alpha4 at least alpha3^2) is the caller's business.
BartlettEstimate theoretical_b_univariate(double alpha2, double alpha3,
                                          double alpha4);

Standardization standardize(const MatrixRef& scores);

// All joint moments of the centered matrix up to max_order (2..6).
MomentTable joint_moments(const MatrixRef& centered, int max_order);

// Nondecreasing multi-indices over {1..q} of orders in [order_lo, order_hi].
std::vector<std::vector<int>> moment_multisets(int q, int order_lo,
                                               int order_hi);

// Bartlett factor from a moment table (orders 2-4), including the positive
// decomposition b = b1 - b2. Cross terms over r < s are symmetrized in
// (r, s) so the decomposition identity holds exactly.
BartlettEstimate b_from_moments(const MomentTable& m);

// Plug-in of the sample central moments, scalar scores. The variance uses
// the n/(n-1) correction; higher moments are plain averages.
BartlettEstimate naive_moment_univariate(const VectorRef& g);

// Multivariate analog on an eigen-standardized matrix.
BartlettEstimate naive_moment_multivariate(const MatrixRef& standardized);

// Reduced-bias estimator for scalar scores:
//   a2~ = n a2^ / (n-1),     a4~ = (n a4^ - 6 a2~^2) / (n-4),
//   a22~ = a2~^2 - a4~ / n,  a3~ = n a3^ / (n-3),
//   a33~ = a3~^2 - (a6^ - a3~^2) / n,  a222~ = a2~^3,
//   b~ = a4~ / (2 a22~) - a33~ / (3 a222~).
BartlettEstimate bias_reduced_univariate(const VectorRef& g);

// Multivariate reduced-bias estimator on an eigen-standardized matrix Y;
// returns (b1~, b2~, b~ = b1~ - b2~). Coincides with the univariate b~ at
// q = 1.
BartlettEstimate bias_reduced_multivariate(const MatrixRef& standardized);

// Robust bootstrap estimate b^ = n (Delta_m / c_med - 1) where Delta_m is
// the median profile statistic at theta_hat over B resamples and c_med the
// chi-square(p) median. Infeasible resamples are dropped and counted; more
// than half dropped raises ReliabilityError.
BartlettEstimate bootstrap_b(const MatrixRef& sample,
                             const EstimatingFunction& gee,
                             const VectorRef& theta_hat, int B,
                             std::uint64_t rng_seed);

}  // namespace ael
