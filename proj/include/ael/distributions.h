#pragma once

namespace ael {

// Regularized lower incomplete gamma P(a, x), series/continued-fraction.
double reg_gamma_p(double a, double x);

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double reg_beta(double a, double b, double x);

double chi2_cdf(double x, double df);
double f_cdf(double x, int d1, int d2);

// Quantiles by bracketed inversion of the CDFs; absolute tolerance 1e-10.
double chi2_quantile(double prob, int df);
double f_quantile(double prob, int d1, int d2);

// Standard normal quantile (Acklam rational approximation plus one Halley
// refinement against erfc).
double normal_quantile(double prob);

}  // namespace ael
