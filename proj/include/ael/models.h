#pragma once

#include "ael/types.h"

#include <functional>
#include <optional>

namespace ael {

// A model is a map (sample, theta) -> score matrix whose population mean
// vanishes at the true parameter. q >= p; the row count of the output
// equals the row count of the sample. Models whose score mean vanishes in
// closed form at an explicit estimate (sample mean, least squares) expose
// it through closed_form_estimate.
class EstimatingFunction {
 public:
  using Evaluator =
      std::function<Matrix(const MatrixRef&, const VectorRef&, bool* overflow)>;
  using ClosedForm = std::function<Vector(const MatrixRef&)>;

  EstimatingFunction(int p, int q, Evaluator eval,
                     ClosedForm closed_form = nullptr)
      : p_(p), q_(q), eval_(std::move(eval)),
        closed_form_(std::move(closed_form)) {}

  int p() const { return p_; }
  int q() const { return q_; }

  Matrix operator()(const MatrixRef& sample, const VectorRef& theta,
                    bool* overflow = nullptr) const {
    if (theta.size() != p_)
      throw InputError("parameter vector has wrong dimension");
    Matrix g = eval_(sample, theta, overflow);
    if (g.rows() != sample.rows() || g.cols() != q_)
      throw ContractError("estimating function produced a misshapen score matrix");
    return g;
  }

  std::optional<Vector> closed_form_estimate(const MatrixRef& sample) const {
    if (!closed_form_) return std::nullopt;
    return closed_form_(sample);
  }

 private:
  int p_;
  int q_;
  Evaluator eval_;
  ClosedForm closed_form_;
};

// g(x; theta) = x - theta, coordinatewise. p = q = dim.
EstimatingFunction mean_model(int dim);

// Fixed-design linear regression scores x_i (y_i - x_i^T beta). The sample
// is the n x 1 response column; the design is captured by value. p = q.
EstimatingFunction linreg_model(Matrix design);

// Expanded asset-pricing scores (r, X2 r, (X3 - 1) r, ..., (Xq - 1) r) with
// r = exp(-0.72 - theta (X1 + X2) + 3 X2) - 1, scalar theta. Exponents are
// clipped at +700 and the clip is reported through the overflow flag.
EstimatingFunction asset_model(int q);

}  // namespace ael
