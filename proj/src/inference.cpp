#include "ael/inference.h"

#include "ael/bartlett.h"
#include "ael/distributions.h"

#include <cmath>
#include <functional>
#include <utility>

namespace ael {

namespace {

constexpr double kGolden = 0.6180339887498949;

double safe_eval(const std::function<double(double)>& f, double x) {
  try {
    return f(x);
  } catch (const SolverError&) {
    return kInf;  // treat stalled duals as off-scale during a search
  }
}

// Bracket a minimum around a finite center and shrink by golden section.
std::pair<double, double> golden_minimize(const std::function<double(double)>& f,
                                          double center, double scale,
                                          double tol) {
  double fc = safe_eval(f, center);
  if (!std::isfinite(fc)) {
    // Scan outward for any finite value before bracketing.
    double h = 0.5 * scale;
    bool found = false;
    for (int k = 0; k < 60 && !found; ++k) {
      for (double sgn : {1.0, -1.0}) {
        const double x = center + sgn * h;
        const double fx = safe_eval(f, x);
        if (std::isfinite(fx)) {
          center = x;
          fc = fx;
          found = true;
          break;
        }
      }
      h *= 1.7;
    }
    if (!found)
      throw SolverError("profile objective is infinite everywhere searched", {});
  }

  double h = 0.5 * scale;
  double left = center - h;
  double right = center + h;
  double fl = safe_eval(f, left);
  double fr = safe_eval(f, right);
  for (int k = 0; k < 100 && fl < fc; ++k) {
    right = center;
    fr = fc;
    center = left;
    fc = fl;
    h *= 1.6;
    left -= h;
    fl = safe_eval(f, left);
  }
  for (int k = 0; k < 100 && fr < fc; ++k) {
    left = center;
    fl = fc;
    center = right;
    fc = fr;
    h *= 1.6;
    right += h;
    fr = safe_eval(f, right);
  }

  double a = left;
  double b = right;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = safe_eval(f, x1);
  double f2 = safe_eval(f, x2);
  for (int k = 0; k < 200 && (b - a) > tol * (1.0 + std::fabs(a) + std::fabs(b));
       ++k) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = safe_eval(f, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = safe_eval(f, x2);
    }
  }
  return (f1 <= f2) ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

double profile_objective(const MatrixRef& sample, const EstimatingFunction& gee,
                         const Adjustment& adj, const Vector& theta) {
  bool overflow = false;
  Matrix g = gee(sample, theta, &overflow);
  if (overflow) return kInf;
  return ael_log_ratio(g, adj).log_ratio;
}

Adjustment scalar_fallback(double b, int trim) {
  // Two-point recipe with a1 - a2 = b / 2 and both levels at least 1/2.
  const double a1 = 0.5 * (1.0 + std::max(b, 0.0));
  const double a2 = 0.5 * (1.0 + std::max(-b, 0.0));
  return Adjustment::two_point(a1, a2, trim);
}

}  // namespace

double conventional_level(Eigen::Index n) {
  return std::max(1.0, 0.5 * std::log(static_cast<double>(n)));
}

Vector max_el_estimate(const MatrixRef& sample, const EstimatingFunction& gee,
                       const Adjustment& adj, const VectorRef& theta_init) {
  if (!theta_init.allFinite())
    throw InputError("initial parameter must be finite");
  if (auto closed = gee.closed_form_estimate(sample)) return *closed;

  if (gee.p() == 1) {
    auto f = [&](double th) {
      return profile_objective(sample, gee, adj, Vector::Constant(1, th));
    };
    const double scale = 1.0 + std::fabs(theta_init[0]);
    auto [argmin, value] = golden_minimize(f, theta_init[0], scale, 1e-8);
    (void)value;
    return Vector::Constant(1, argmin);
  }

  // Coordinate descent with per-coordinate golden section.
  Vector theta = theta_init;
  for (int sweep = 0; sweep < 50; ++sweep) {
    const Vector before = theta;
    for (int j = 0; j < gee.p(); ++j) {
      auto f = [&](double tj) {
        Vector probe = theta;
        probe[j] = tj;
        return profile_objective(sample, gee, adj, probe);
      };
      const double scale = 1.0 + std::fabs(theta[j]);
      theta[j] = golden_minimize(f, theta[j], scale, 1e-9).first;
    }
    if ((theta - before).norm() < 1e-8 * (1.0 + theta.norm())) break;
  }
  return theta;
}

double delta_statistic(const MatrixRef& sample, const EstimatingFunction& gee,
                       const VectorRef& theta0, const Adjustment& adj,
                       std::optional<Vector> theta_init) {
  const Vector init = theta_init ? *theta_init : Vector(theta0);
  const Vector theta_hat = max_el_estimate(sample, gee, adj, init);
  const double at_min = profile_objective(sample, gee, adj, theta_hat);
  const double at_theta0 = profile_objective(sample, gee, adj, Vector(theta0));
  if (!std::isfinite(at_theta0)) return kInf;
  if (!std::isfinite(at_min))
    throw SolverError("profile minimum could not be evaluated", {});
  return std::max(at_theta0 - at_min, 0.0);
}

ResolvedAdjustment resolve_adjustment(const MatrixRef& scores_at_hat,
                                      const BSource& source, int trim_count,
                                      const MatrixRef& sample,
                                      const EstimatingFunction& gee,
                                      const VectorRef& theta_hat,
                                      std::uint64_t bootstrap_seed) {
  const int q = static_cast<int>(scores_at_hat.cols());
  ResolvedAdjustment out;

  switch (source.kind) {
    case BSource::Kind::None:
      throw ContractError("this method requires a Bartlett factor source");
    case BSource::Kind::Theoretical:
      out.b = source.b;
      out.b1 = source.b1;
      out.b2 = source.b2;
      break;
    case BSource::Kind::NaiveMoment: {
      const BartlettEstimate e =
          (q == 1)
              ? naive_moment_univariate(scores_at_hat.col(0))
              : naive_moment_multivariate(standardize(scores_at_hat).transformed);
      out.b = e.b;
      out.b1 = e.b1;
      out.b2 = e.b2;
      break;
    }
    case BSource::Kind::BiasReduced: {
      const BartlettEstimate e =
          (q == 1) ? bias_reduced_univariate(scores_at_hat.col(0))
                   : bias_reduced_multivariate(
                         standardize(scores_at_hat).transformed);
      out.b = e.b;
      out.b1 = e.b1;
      out.b2 = e.b2;
      break;
    }
    case BSource::Kind::Bootstrap: {
      const BartlettEstimate e = bootstrap_b(sample, gee, theta_hat,
                                             source.bootstrap_B, bootstrap_seed);
      out.b = e.b;
      break;
    }
  }

  if (q == 1) {
    if (out.b > 0.0) {
      out.adjustment = Adjustment::single(0.5 * out.b, trim_count);
      return out;
    }
    // Nonpositive scalar factor: switch to the two-point form with the
    // univariate reduced-bias components, which are positive except in
    // degenerate samples.
    try {
      const BartlettEstimate e = bias_reduced_univariate(scores_at_hat.col(0));
      if (e.b1 > 0.0 && e.b2 > 0.0) {
        out.adjustment =
            Adjustment::two_point(0.5 * e.b1, 0.5 * e.b2, trim_count);
        return out;
      }
    } catch (const Error&) {
    }
    out.adjustment = scalar_fallback(out.b, trim_count);
    return out;
  }

  if (out.b1 && out.b2 && *out.b1 > 0.0 && *out.b2 > 0.0) {
    out.adjustment =
        Adjustment::two_point(0.5 * *out.b1, 0.5 * *out.b2, trim_count);
    return out;
  }
  // Scalar-only factor (bootstrap or a plain off-line value): one
  // pseudo-observation at b/2 while that is positive.
  if (out.b > 0.0) {
    out.adjustment = Adjustment::single(0.5 * out.b, trim_count);
    return out;
  }
  out.adjustment = scalar_fallback(out.b, trim_count);
  return out;
}

double el_statistic(const MatrixRef& sample, const EstimatingFunction& gee,
                    const VectorRef& theta0, const MethodSpec& method) {
  const Matrix g0 = gee(sample, theta0);
  const Eigen::Index n = sample.rows();

  switch (method.kind) {
    case MethodKind::EL:
      return el_log_ratio(g0).log_ratio;
    case MethodKind::AEL0:
      return ael_log_ratio(
                 g0, Adjustment::single(conventional_level(n), method.trim_count))
          .log_ratio;
    case MethodKind::Hotelling:
    case MethodKind::FTest:
      throw InputError("classical baselines have no log-likelihood statistic");
    case MethodKind::BEL:
    case MethodKind::AEL:
      break;
  }

  const Vector theta_hat = max_el_estimate(
      sample, gee,
      Adjustment::single(conventional_level(n), method.trim_count), theta0);
  const Matrix g_hat = gee(sample, theta_hat);
  const ResolvedAdjustment res =
      resolve_adjustment(g_hat, method.b_source, method.trim_count, sample, gee,
                         theta_hat, method.bootstrap_seed);

  if (method.kind == MethodKind::AEL)
    return ael_log_ratio(g0, res.adjustment).log_ratio;

  const double r = el_log_ratio(g0).log_ratio;
  const double ratio = res.b / static_cast<double>(n);
  if (method.multiplicative_bel) return r * (1.0 - ratio);
  return r / std::max(1.0 + ratio, 1e-8);
}

bool hotelling_covers(const MatrixRef& sample, const VectorRef& theta0,
                      double level) {
  const Eigen::Index n = sample.rows();
  const Eigen::Index p = sample.cols();
  if (n <= p) throw InputError("Hotelling test needs n > p");
  const Vector mean = sample.colwise().mean();
  const Matrix centered = sample.rowwise() - mean.transpose();
  const Matrix s = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::LDLT<Matrix> ldlt(s);
  if (ldlt.info() != Eigen::Success ||
      ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff()))
    throw DegenerateError("sample covariance is singular");
  const Vector diff = mean - theta0;
  const double t2 = static_cast<double>(n) * diff.dot(ldlt.solve(diff));
  const double scaled = static_cast<double>(n - p) * t2 /
                        (static_cast<double>(p) * static_cast<double>(n - 1));
  return scaled <= f_quantile(level, static_cast<int>(p), static_cast<int>(n - p));
}

bool ftest_covers(const MatrixRef& responses, const MatrixRef& design,
                  const VectorRef& beta0, double level) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (n <= p) throw InputError("F test needs n > p");
  const Vector y = responses.col(0);
  const Vector beta_hat = design.colPivHouseholderQr().solve(y);
  const double rss = (y - design * beta_hat).squaredNorm();
  const double s2 = rss / static_cast<double>(n - p);
  if (!(s2 > 0.0)) throw DegenerateError("residual variance is zero");
  const Vector diff = beta_hat - beta0;
  const double fstat =
      diff.dot((design.transpose() * design) * diff) / (static_cast<double>(p) * s2);
  return fstat <= f_quantile(level, static_cast<int>(p), static_cast<int>(n - p));
}

IntervalResult confidence_interval(const MatrixRef& sample,
                                   const EstimatingFunction& gee,
                                   const MethodSpec& method, double level) {
  if (gee.p() != 1)
    throw InputError("interval tracing is defined for scalar parameters");
  if (!(level > 0.0 && level < 1.0)) throw InputError("level must lie in (0, 1)");
  const Eigen::Index n = sample.rows();

  std::function<double(double)> stat;
  double cutoff;
  Vector center(1);

  if (method.kind == MethodKind::Hotelling) {
    if (gee.q() != 1) throw InputError("Hotelling interval needs scalar scores");
    center[0] = sample.col(0).mean();
    cutoff = f_quantile(level, 1, static_cast<int>(n - 1));
    stat = [&sample, n](double th) {
      const double mean = sample.col(0).mean();
      const double s2 =
          (sample.col(0).array() - mean).square().sum() / static_cast<double>(n - 1);
      return static_cast<double>(n) * (mean - th) * (mean - th) / s2;
    };
  } else {
    const Adjustment est_adj =
        Adjustment::single(conventional_level(n), method.trim_count);
    Vector init = Vector::Zero(1);
    init[0] = sample.col(0).mean();  // generic starting point
    center = max_el_estimate(sample, gee, est_adj, init);
    if (gee.q() == gee.p()) {
      cutoff = chi2_quantile(level, gee.q());
      stat = [&](double th) {
        return el_statistic(sample, gee, Vector::Constant(1, th), method);
      };
    } else {
      cutoff = chi2_quantile(level, gee.p());
      const ResolvedAdjustment res = resolve_adjustment(
          gee(sample, center), method.b_source.kind == BSource::Kind::None
                                   ? BSource::theoretical(0.0)
                                   : method.b_source,
          method.trim_count, sample, gee, center, method.bootstrap_seed);
      const Adjustment adj = (method.kind == MethodKind::AEL) ? res.adjustment
                             : (method.kind == MethodKind::AEL0)
                                 ? Adjustment::single(conventional_level(n),
                                                      method.trim_count)
                                 : Adjustment::none();
      const double scale =
          (method.kind == MethodKind::BEL)
              ? std::max(1.0 + res.b / static_cast<double>(n), 1e-8)
              : 1.0;
      stat = [&sample, &gee, adj, scale, center](double th) {
        return delta_statistic(sample, gee, Vector::Constant(1, th), adj,
                               Vector(center)) /
               scale;
      };
    }
  }

  auto locate = [&](double direction) {
    const double scale = 1.0 + std::fabs(center[0]);
    double step = 0.5 * scale;
    double inner = center[0];
    double outer = inner + direction * step;
    int guard = 0;
    while (stat(outer) < cutoff) {
      inner = outer;
      step *= 2.0;
      outer = center[0] + direction * step;
      if (++guard > 200)
        throw SolverError("confidence bound bracket failed to expand", {});
    }
    for (int k = 0; k < 200 && std::fabs(outer - inner) > 1e-10 * scale; ++k) {
      const double mid = 0.5 * (inner + outer);
      if (stat(mid) < cutoff)
        inner = mid;
      else
        outer = mid;
    }
    const double endpoint = 0.5 * (inner + outer);
    const double check = stat(endpoint);
    if (std::isfinite(check) && std::fabs(check - cutoff) > 1e-6 * (1.0 + cutoff))
      throw SolverError("statistic is not a clean crossing at the bound", {});
    return endpoint;
  };

  IntervalResult out;
  out.lower = locate(-1.0);
  out.upper = locate(+1.0);
  out.level = level;
  out.method = method;
  return out;
}

}  // namespace ael
