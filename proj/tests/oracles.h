#pragma once

#include "ael/types.h"

#include <functional>

namespace ael::oracles {

// Root of sum_i g_i / (1 + lambda g_i) = 0 by bisection over the feasible
// interval (-1/max g, -1/min g); requires min g < 0 < max g.
double bisect_dual_scalar(const VectorRef& g);

// Brute-force EL log ratio for scalar scores with n <= 4: grid search over
// the probability simplex intersected with the zero-mean constraint, with
// one zoom refinement. Independent of the dual solver.
double grid_el_log_ratio(const VectorRef& g, int coarse = 400, int fine = 400);

// Adaptive-Simpson CDFs, independent of the incomplete gamma/beta code.
double quad_chi2_cdf(double x, int df);
double quad_f_cdf(double x, int d1, int d2);

// Quantile of an arbitrary increasing CDF by bracketed bisection.
double quantile_of(const std::function<double(double)>& cdf, double prob);

}  // namespace ael::oracles
