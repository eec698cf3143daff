#include "ael/bartlett.h"

#include "ael/distributions.h"
#include "ael/inference.h"
#include "ael/rng.h"

#include <algorithm>
#include <cmath>

namespace ael {

namespace {

std::vector<int> sorted(std::vector<int> idx) {
  std::sort(idx.begin(), idx.end());
  return idx;
}

void check_index(const std::vector<int>& idx, int q, int max_order) {
  if (idx.empty() || static_cast<int>(idx.size()) > max_order)
    throw InputError("moment index order out of range");
  for (int c : idx)
    if (c < 1 || c > q) throw InputError("moment index coordinate out of range");
}

// Enumerate nondecreasing multi-indices of the given order over {1..q}.
void enumerate_multisets(int q, int order, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == order) {
    out.push_back(current);
    return;
  }
  const int start = current.empty() ? 1 : current.back();
  for (int c = start; c <= q; ++c) {
    current.push_back(c);
    enumerate_multisets(q, order, current, out);
    current.pop_back();
  }
}

std::vector<int> doubled(const std::vector<int>& idx) {
  std::vector<int> d;
  d.reserve(2 * idx.size());
  for (int c : idx) {
    d.push_back(c);
    d.push_back(c);
  }
  return sorted(std::move(d));
}

double central_moment(const VectorRef& g, int order) {
  const double mean = g.mean();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    sum += std::pow(g[i] - mean, order);
  return sum / static_cast<double>(g.size());
}

// Accessors shared by the plug-in and reduced-bias multivariate paths.
// ratio(numerator multiset, denominator variance indices) yields one term
// of the b1/b2 display with products of moments replaced consistently.
struct MomentTerms {
  // Fourth-order cross term alpha^{rrss} / (alpha^{rr} alpha^{ss}).
  std::function<double(int, int)> quartic;
  // Squared third-order term (alpha^{abc})^2 / (alpha^{aa}alpha^{bb}alpha^{cc})
  // with (a, b, c) any triple, repeats allowed.
  std::function<double(int, int, int)> cubic_sq;
};

BartlettEstimate assemble_b(int q, const MomentTerms& t, BMethod method,
                            int n_used) {
  double b1 = 0.0;
  double b2 = 0.0;
  for (int r = 1; r <= q; ++r)
    b1 += t.quartic(r, r) / 2.0 - t.cubic_sq(r, r, r) / 3.0;
  for (int r = 1; r <= q; ++r)
    for (int s = r + 1; s <= q; ++s) {
      const double sym = 0.5 * (t.cubic_sq(r, s, s) + t.cubic_sq(s, r, r));
      b1 += t.quartic(r, s) - sym;
      b2 += sym;
    }
  for (int r = 1; r <= q; ++r)
    for (int s = r + 1; s <= q; ++s)
      for (int u = s + 1; u <= q; ++u) b2 += 2.0 * t.cubic_sq(r, s, u);
  b1 /= q;
  b2 /= q;

  BartlettEstimate est;
  est.b1 = b1;
  est.b2 = b2;
  est.b = b1 - b2;
  est.has_components = true;
  est.method = method;
  est.n_used = n_used;
  return est;
}

}  // namespace

double MomentTable::at(std::vector<int> idx) const {
  check_index(idx, q_, max_order_);
  auto it = values_.find(sorted(std::move(idx)));
  if (it == values_.end()) throw InputError("moment table entry missing");
  return it->second;
}

void MomentTable::set(std::vector<int> idx, double value) {
  check_index(idx, q_, max_order_);
  values_[sorted(std::move(idx))] = value;
}

bool MomentTable::contains(std::vector<int> idx) const {
  check_index(idx, q_, max_order_);
  return values_.count(sorted(std::move(idx))) > 0;
}

BartlettEstimate theoretical_b_univariate(double alpha2, double alpha3,
                                          double alpha4) {
  if (!(alpha2 > 0.0)) throw InputError("second central moment must be positive");
  BartlettEstimate est;
  est.b1 = alpha4 / (2.0 * alpha2 * alpha2);
  est.b2 = alpha3 * alpha3 / (3.0 * alpha2 * alpha2 * alpha2);
  est.b = est.b1 - est.b2;
  est.has_components = true;
  est.method = BMethod::Theoretical;
  est.n_used = 0;
  return est;
}

Standardization standardize(const MatrixRef& scores) {
  if (scores.rows() < 2) throw InputError("standardize needs at least two rows");
  if (!scores.allFinite()) throw InputError("score matrix contains non-finite entries");
  const Eigen::Index n = scores.rows();
  const Eigen::Index q = scores.cols();

  Matrix centered = scores.rowwise() - scores.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success)
    throw DegenerateError("covariance eigendecomposition failed");

  Standardization out;
  out.rotation.resize(q, q);
  out.eigenvalues.resize(q);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index j = 0; j < q; ++j) {
    out.eigenvalues[j] = eig.eigenvalues()[q - 1 - j];
    out.rotation.col(j) = eig.eigenvectors().col(q - 1 - j);
  }
  if (!(out.eigenvalues[q - 1] > 1e-12 * out.eigenvalues[0]))
    throw DegenerateError("sample covariance is numerically rank deficient");
  for (Eigen::Index j = 0; j < q; ++j) {
    for (Eigen::Index i = 0; i < q; ++i) {
      if (std::fabs(out.rotation(i, j)) > 1e-12) {
        if (out.rotation(i, j) < 0.0) out.rotation.col(j) *= -1.0;
        break;
      }
    }
  }
  out.transformed = centered * out.rotation;
  return out;
}

std::vector<std::vector<int>> moment_multisets(int q, int order_lo,
                                               int order_hi) {
  std::vector<std::vector<int>> out;
  std::vector<int> scratch;
  for (int order = order_lo; order <= order_hi; ++order)
    enumerate_multisets(q, order, scratch, out);
  return out;
}

MomentTable joint_moments(const MatrixRef& centered, int max_order) {
  if (max_order < 2 || max_order > 6)
    throw InputError("moment order must lie in [2, 6]");
  const Eigen::Index n = centered.rows();
  const Eigen::Index q = centered.cols();
  const double mean_tol = 1e-10 * std::max(1.0, centered.cwiseAbs().maxCoeff());
  if ((centered.colwise().mean().cwiseAbs().array() > mean_tol).any())
    throw ContractError("joint_moments requires centered columns");

  MomentTable table(static_cast<int>(q), static_cast<int>(n), max_order);
  const auto multisets = moment_multisets(static_cast<int>(q), 2, max_order);
  for (const auto& idx : multisets) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double prod = 1.0;
      for (int c : idx) prod *= centered(i, c - 1);
      sum += prod;
    }
    table.set(idx, sum / static_cast<double>(n));
  }
  return table;
}

BartlettEstimate b_from_moments(const MomentTable& m) {
  const int q = m.q();
  for (int r = 1; r <= q; ++r)
    if (!(m.at({r, r}) > 0.0))
      throw InputError("all variances in the moment table must be positive");

  MomentTerms t;
  t.quartic = [&m](int r, int s) {
    return m.at({r, r, s, s}) / (m.at({r, r}) * m.at({s, s}));
  };
  t.cubic_sq = [&m](int a, int b, int c) {
    const double num = m.at({a, b, c});
    return num * num / (m.at({a, a}) * m.at({b, b}) * m.at({c, c}));
  };
  return assemble_b(q, t, BMethod::Moment, m.n());
}

BartlettEstimate naive_moment_univariate(const VectorRef& g) {
  if (g.size() < 2) throw InputError("need at least two observations");
  const auto n = static_cast<double>(g.size());
  // The variance in the denominators carries the easy n/(n-1) bias fix;
  // the third and fourth moments stay as plain averages.
  const double a2 = central_moment(g, 2) * n / (n - 1.0);
  if (!(a2 > 0.0)) throw DegenerateError("sample variance is zero");
  const double a3 = central_moment(g, 3);
  const double a4 = central_moment(g, 4);
  BartlettEstimate est = theoretical_b_univariate(a2, a3, a4);
  est.method = BMethod::Moment;
  est.n_used = static_cast<int>(g.size());
  return est;
}

BartlettEstimate naive_moment_multivariate(const MatrixRef& standardized) {
  const auto n = static_cast<double>(standardized.rows());
  if (standardized.rows() < 2) throw InputError("need at least two observations");
  MomentTable table = joint_moments(standardized, 4);
  for (int r = 1; r <= table.q(); ++r)
    table.set({r, r}, table.at({r, r}) * n / (n - 1.0));
  BartlettEstimate est = b_from_moments(table);
  est.method = BMethod::Moment;
  return est;
}

BartlettEstimate bias_reduced_univariate(const VectorRef& g) {
  const auto n = static_cast<double>(g.size());
  if (g.size() < 5) throw InputError("reduced-bias estimator needs n >= 5");
  const double a2h = central_moment(g, 2);
  const double a3h = central_moment(g, 3);
  const double a4h = central_moment(g, 4);
  const double a6h = central_moment(g, 6);
  if (!(a2h > 0.0)) throw DegenerateError("sample variance is zero");

  const double a2t = n * a2h / (n - 1.0);
  const double a4t = (n * a4h - 6.0 * a2t * a2t) / (n - 4.0);
  const double a22t = a2t * a2t - a4t / n;
  const double a3t = n * a3h / (n - 3.0);
  const double a33t = a3t * a3t - (a6h - a3t * a3t) / n;
  const double a222t = a2t * a2t * a2t;
  if (!(a22t > 0.0))
    throw DegenerateError("reduced-bias variance-square estimate is not positive");

  BartlettEstimate est;
  est.b1 = a4t / (2.0 * a22t);
  est.b2 = a33t / (3.0 * a222t);
  est.b = est.b1 - est.b2;
  est.has_components = true;
  est.method = BMethod::BiasReduced;
  est.n_used = static_cast<int>(g.size());
  return est;
}

BartlettEstimate bias_reduced_multivariate(const MatrixRef& standardized) {
  const auto n = static_cast<double>(standardized.rows());
  const int q = static_cast<int>(standardized.cols());
  if (standardized.rows() < 5) throw InputError("reduced-bias estimator needs n >= 5");

  const MomentTable raw = joint_moments(standardized, 6);

  auto var_t = [&](int r) { return n * raw.at({r, r}) / (n - 1.0); };
  for (int r = 1; r <= q; ++r)
    if (!(var_t(r) > 0.0))
      throw DegenerateError("reduced-bias variance estimate is not positive");

  auto quartic_t = [&](int r, int s) {
    const double same = (r == s) ? 4.0 * var_t(r) * var_t(r) : 0.0;
    return (n * raw.at({r, r, s, s}) - 2.0 * var_t(r) * var_t(s) - same) /
           (n - 4.0);
  };
  auto cubic_t = [&](int a, int b, int c) {
    return n * raw.at({a, b, c}) / (n - 3.0);
  };

  MomentTerms t;
  t.quartic = [&, quartic_t](int r, int s) {
    const double denom = var_t(r) * var_t(s) - quartic_t(r, s) / n;
    return quartic_t(r, s) / denom;
  };
  t.cubic_sq = [&, cubic_t](int a, int b, int c) {
    const double m3 = cubic_t(a, b, c);
    const double sixth = raw.at(doubled({a, b, c}));
    const double num = m3 * m3 - (sixth - m3 * m3) / n;
    return num / (var_t(a) * var_t(b) * var_t(c));
  };
  BartlettEstimate est =
      assemble_b(q, t, BMethod::BiasReduced, static_cast<int>(n));
  return est;
}

BartlettEstimate bootstrap_b(const MatrixRef& sample,
                             const EstimatingFunction& gee,
                             const VectorRef& theta_hat, int B,
                             std::uint64_t rng_seed) {
  if (B < 1) throw InputError("bootstrap requires B >= 1");
  if (gee.q() <= gee.p())
    throw InputError("bootstrap factor estimate targets over-identified models");
  const Eigen::Index n = sample.rows();

  std::vector<double> deltas;
  deltas.reserve(B);
  int dropped = 0;
  Matrix resample(n, sample.cols());
  for (int rep = 0; rep < B; ++rep) {
    Rng rng = Rng::stream(rng_seed, {static_cast<std::uint64_t>(rep)});
    for (Eigen::Index i = 0; i < n; ++i)
      resample.row(i) = sample.row(static_cast<Eigen::Index>(
          rng.below(static_cast<std::uint64_t>(n))));
    try {
      const double d = delta_statistic(resample, gee, theta_hat,
                                       Adjustment::none(), theta_hat);
      if (std::isfinite(d))
        deltas.push_back(d);
      else
        ++dropped;
    } catch (const Error&) {
      ++dropped;
    }
  }

  if (static_cast<int>(deltas.size()) < (B + 1) / 2)
    throw ReliabilityError("more than half of the bootstrap resamples were unusable",
                           static_cast<int>(deltas.size()), B);

  std::sort(deltas.begin(), deltas.end());
  const size_t k = deltas.size();
  const double delta_m = (k % 2 == 1)
                             ? deltas[k / 2]
                             : 0.5 * (deltas[k / 2 - 1] + deltas[k / 2]);
  const double c_med = chi2_quantile(0.5, gee.p());

  BartlettEstimate est;
  est.b = static_cast<double>(n) * (delta_m / c_med - 1.0);
  est.has_components = false;
  est.method = BMethod::Bootstrap;
  est.n_used = static_cast<int>(n);
  est.feasible_resamples = static_cast<int>(k);
  est.dropped_resamples = dropped;
  return est;
}

}  // namespace ael
