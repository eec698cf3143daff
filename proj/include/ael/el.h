#pragma once

#include "ael/types.h"

namespace ael {

struct DualOptions {
  double tol = 1e-12;           // gradient inf-norm target, normalized scores
  double converged_tol = 1e-10; // worst residual still reported as Converged
  int max_iterations = 100;
  double lambda_cap = 1e6;      // divergence proxy on normalized scores
  int pinned_limit = 20;        // consecutive floor-pinned iterations
};

// Maximizes the dual objective Q(lambda) = sum_i log(1 + lambda^T g_i) over
// {lambda : 1 + lambda^T g_i > 0 for all i} by damped Newton with
// step-halving; the backtracking keeps 1 + lambda^T g_i >= 1/n. Reports
// Infeasible when zero is not interior to the convex hull of the rows
// (exact min < 0 < max test for q = 1, divergence proxy otherwise).
DualSolution solve_dual(const MatrixRef& scores, const DualOptions& opts = {});

// Optimal probability weights p_i = 1 / (n (1 + lambda^T g_i)).
// Requires a converged dual.
Vector el_weights(const MatrixRef& scores, const DualSolution& dual);

// Empirical log-likelihood ratio 2 sum_i log(1 + lambda^T g_i), i.e.
// -2 log(n^n sup prod p_i) under the mean-zero constraint. +inf when the
// constraint set is empty. Throws SolverError if the dual stalls.
ELValue el_log_ratio(const MatrixRef& scores, const DualOptions& opts = {});

// Appends the pseudo-observation row(s) prescribed by adj.
Matrix augment(const MatrixRef& scores, const Adjustment& adj);

// Log-likelihood ratio on the augmented score set; the n'^n' normalizer
// for n' = n+1 or n+2 rows is implicit in the weight parametrization.
ELValue ael_log_ratio(const MatrixRef& scores, const Adjustment& adj,
                      const DualOptions& opts = {});

// Dual objective sum_i log(1 + lambda^T g_i); -inf outside the domain.
double dual_objective(const MatrixRef& scores, const VectorRef& lambda);

// Indices of the count rows with largest Euclidean norm, ties resolved
// toward the earlier row. Used to pin an anchor exclusion set.
std::vector<int> largest_norm_rows(const MatrixRef& scores, int count);

}  // namespace ael
