#include "ael/el.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace ael {

namespace {

void check_scores(const MatrixRef& g) {
  if (g.rows() < 1 || g.cols() < 1)
    throw InputError("score matrix must have at least one row and column");
  if (!g.allFinite())
    throw InputError("score matrix contains non-finite entries");
}

Vector anchor_mean(const MatrixRef& g, const Adjustment& adj) {
  const Eigen::Index n = g.rows();
  if (!adj.anchor_exclude.empty()) {
    std::vector<bool> drop(static_cast<size_t>(n), false);
    Eigen::Index kept = n;
    for (int idx : adj.anchor_exclude) {
      if (idx < 0 || idx >= n)
        throw InputError("anchor exclusion index out of range");
      if (!drop[static_cast<size_t>(idx)]) {
        drop[static_cast<size_t>(idx)] = true;
        --kept;
      }
    }
    if (kept < 1) throw InputError("anchor exclusions cover every row");
    Vector mean = Vector::Zero(g.cols());
    for (Eigen::Index i = 0; i < n; ++i)
      if (!drop[static_cast<size_t>(i)]) mean += g.row(i);
    return mean / static_cast<double>(kept);
  }

  if (adj.trim_count < 0 || adj.trim_count >= n)
    throw InputError("trim count must lie in [0, n)");
  if (adj.trim_count == 0) return g.colwise().mean();
  const std::vector<int> order = largest_norm_rows(g, adj.trim_count);
  std::vector<bool> drop(static_cast<size_t>(n), false);
  for (int idx : order) drop[static_cast<size_t>(idx)] = true;
  Vector mean = Vector::Zero(g.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    if (!drop[static_cast<size_t>(i)]) mean += g.row(i);
  return mean / static_cast<double>(n - adj.trim_count);
}

}  // namespace

std::vector<int> largest_norm_rows(const MatrixRef& g, int count) {
  const Eigen::Index n = g.rows();
  if (count < 0 || count >= n)
    throw InputError("row count to select must lie in [0, n)");
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Vector norms(n);
  for (Eigen::Index i = 0; i < n; ++i) norms[i] = g.row(i).norm();
  // Largest norms first; equal norms pick the earlier row first.
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (norms[a] != norms[b]) return norms[a] > norms[b];
    return a < b;
  });
  order.resize(static_cast<size_t>(count));
  return order;
}

double dual_objective(const MatrixRef& scores, const VectorRef& lambda) {
  Vector w = Vector::Ones(scores.rows()) + scores * lambda;
  if ((w.array() <= 0.0).any()) return -kInf;
  return w.array().log().sum();
}

DualSolution solve_dual(const MatrixRef& scores, const DualOptions& opts) {
  check_scores(scores);
  const Eigen::Index n = scores.rows();
  const Eigen::Index q = scores.cols();

  DualSolution sol;
  sol.lambda = Vector::Zero(q);

  const double max_abs = scores.cwiseAbs().maxCoeff();
  if (max_abs == 0.0) {  // all rows exactly zero: lambda = 0 is optimal
    sol.status = DualStatus::Converged;
    sol.residual_norm = 0.0;
    sol.iterations = 0;
    return sol;
  }

  if (q == 1) {  // exact hull test
    const double lo = scores.col(0).minCoeff();
    const double hi = scores.col(0).maxCoeff();
    if (!(lo < 0.0 && 0.0 < hi)) {
      sol.status = DualStatus::Infeasible;
      return sol;
    }
  } else {
    bool identical = true;
    for (Eigen::Index i = 1; i < n && identical; ++i)
      identical = (scores.row(i) == scores.row(0));
    if (identical) {  // single nonzero point cannot cover the origin
      sol.status = DualStatus::Infeasible;
      return sol;
    }
  }

  // Column normalization keeps the lambda cap and tolerances scale-free.
  Vector scale(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    const double s = scores.col(j).cwiseAbs().maxCoeff();
    scale[j] = (s > 0.0) ? s : 1.0;
  }
  Matrix g = scores.array().rowwise() / scale.transpose().array();

  const double floor = 1.0 / static_cast<double>(n);
  Vector lam = Vector::Zero(q);
  Vector w = Vector::Ones(n);
  double obj = 0.0;
  int pinned = 0;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    Vector inv_w = w.cwiseInverse();
    Vector grad = g.transpose() * inv_w;
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    if (gnorm <= opts.tol) {
      sol.lambda = lam.cwiseQuotient(scale);
      sol.status = DualStatus::Converged;
      sol.residual_norm = gnorm;
      sol.iterations = iter - 1;
      return sol;
    }

    Matrix h = g.transpose() * inv_w.array().square().matrix().asDiagonal() * g;
    Vector step;
    double ridge = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::LDLT<Matrix> ldlt(h + ridge * Matrix::Identity(q, q));
      step = ldlt.solve(grad);
      if (ldlt.info() == Eigen::Success && step.allFinite()) break;
      if (attempt >= 8) {
        sol.lambda = lam.cwiseQuotient(scale);
        sol.residual_norm = gnorm;
        sol.iterations = iter;
        throw SolverError("dual Hessian solve failed", sol);
      }
      ridge = (ridge == 0.0) ? 1e-12 * (1.0 + h.trace() / q) : ridge * 100.0;
    }

    const double slope = grad.dot(step);
    // Near the optimum the quadratic improvement falls below the roundoff
    // level of the objective; the slack term lets those polishing steps
    // through so the gradient can collapse to machine precision.
    const double slack = 1e-13 * (1.0 + std::fabs(obj));
    double t = 1.0;
    bool moved = false;
    Vector lam_try, w_try;
    for (int halving = 0; halving < 60; ++halving) {
      lam_try = lam + t * step;
      w_try = Vector::Ones(n) + g * lam_try;
      if (w_try.minCoeff() >= floor) {
        const double obj_try = w_try.array().log().sum();
        if (obj_try >= obj + 1e-4 * t * slope - slack) {
          lam = lam_try;
          w = w_try;
          obj = obj_try;
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }

    if (!moved) {
      // Blocked: roundoff-level optimum or a floor-limited ascent path.
      if (gnorm <= opts.converged_tol) {
        sol.lambda = lam.cwiseQuotient(scale);
        sol.status = DualStatus::Converged;
        sol.residual_norm = gnorm;
        sol.iterations = iter;
        return sol;
      }
      ++pinned;
    } else if (w.minCoeff() <= 2.0 * floor && gnorm > 100.0 * opts.tol) {
      ++pinned;
    } else {
      pinned = 0;
    }

    if (lam.norm() > opts.lambda_cap || pinned >= opts.pinned_limit) {
      sol.lambda = lam.cwiseQuotient(scale);
      sol.status = DualStatus::Infeasible;
      sol.residual_norm = gnorm;
      sol.iterations = iter;
      return sol;
    }
  }

  sol.lambda = lam.cwiseQuotient(scale);
  sol.status = DualStatus::MaxIterations;
  sol.residual_norm = (g.transpose() * w.cwiseInverse()).lpNorm<Eigen::Infinity>();
  sol.iterations = opts.max_iterations;
  return sol;
}

Vector el_weights(const MatrixRef& scores, const DualSolution& dual) {
  check_scores(scores);
  if (dual.status != DualStatus::Converged)
    throw ContractError("el_weights requires a converged dual solution");
  const Eigen::Index n = scores.rows();
  Vector w = Vector::Ones(n) + scores * dual.lambda;
  if ((w.array() <= 0.0).any())
    throw ContractError("dual solution violates positivity of 1 + lambda^T g");
  return (w.array() * static_cast<double>(n)).inverse().matrix();
}

ELValue el_log_ratio(const MatrixRef& scores, const DualOptions& opts) {
  ELValue value;
  value.dual = solve_dual(scores, opts);
  switch (value.dual.status) {
    case DualStatus::Infeasible:
      value.log_ratio = kInf;
      return value;
    case DualStatus::MaxIterations:
      throw SolverError("dual solver hit the iteration limit", value.dual);
    case DualStatus::Converged:
      break;
  }
  Vector w = Vector::Ones(scores.rows()) + scores * value.dual.lambda;
  double r = 2.0 * w.array().log().sum();
  if (r < 0.0) {
    if (r < -1e-9)
      throw SolverError("negative log-likelihood ratio beyond tolerance",
                        value.dual);
    r = 0.0;
  }
  value.log_ratio = r;
  return value;
}

Matrix augment(const MatrixRef& scores, const Adjustment& adj) {
  check_scores(scores);
  if (adj.kind == Adjustment::Kind::None) return scores;

  const Vector anchor = anchor_mean(scores, adj);
  const Eigen::Index n = scores.rows();
  const Eigen::Index extra = (adj.kind == Adjustment::Kind::Single) ? 1 : 2;
  Matrix out(n + extra, scores.cols());
  out.topRows(n) = scores;
  out.row(n) = -adj.a1 * anchor.transpose();
  if (extra == 2) out.row(n + 1) = adj.a2 * anchor.transpose();
  return out;
}

ELValue ael_log_ratio(const MatrixRef& scores, const Adjustment& adj,
                      const DualOptions& opts) {
  if (adj.kind == Adjustment::Kind::None) return el_log_ratio(scores, opts);
  return el_log_ratio(augment(scores, adj), opts);
}

}  // namespace ael
