#include "ael/models.h"

#include <cmath>
#include <utility>

namespace ael {

EstimatingFunction mean_model(int dim) {
  if (dim < 1) throw InputError("mean model dimension must be positive");
  auto eval = [dim](const MatrixRef& sample, const VectorRef& theta,
                    bool*) -> Matrix {
    if (sample.cols() != dim)
      throw InputError("sample column count does not match the model dimension");
    return sample.rowwise() - theta.transpose();
  };
  auto closed = [](const MatrixRef& sample) -> Vector {
    return sample.colwise().mean();
  };
  return {dim, dim, std::move(eval), std::move(closed)};
}

EstimatingFunction linreg_model(Matrix design) {
  const auto p = static_cast<int>(design.cols());
  if (design.rows() < design.cols())
    throw InputError("design matrix needs at least as many rows as columns");
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < design.cols())
    throw InputError("design matrix must have full column rank");

  auto eval = [design](const MatrixRef& sample, const VectorRef& beta,
                       bool*) -> Matrix {
    if (sample.cols() != 1)
      throw InputError("regression sample must be a single response column");
    if (sample.rows() != design.rows())
      throw InputError("response length does not match the design row count");
    Vector resid = sample.col(0) - design * beta;
    return design.array().colwise() * resid.array();
  };
  auto closed = [design](const MatrixRef& sample) -> Vector {
    return design.colPivHouseholderQr().solve(sample.col(0));
  };
  return {p, p, std::move(eval), std::move(closed)};
}

EstimatingFunction asset_model(int q) {
  if (q < 2) throw InputError("asset model requires q >= 2");
  auto eval = [q](const MatrixRef& sample, const VectorRef& theta,
                  bool* overflow) -> Matrix {
    if (sample.cols() != q)
      throw InputError("asset sample must have q columns");
    const double th = theta[0];
    const Eigen::Index n = sample.rows();
    Matrix g(n, q);
    bool clipped = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double expo = -0.72 - th * (sample(i, 0) + sample(i, 1)) + 3.0 * sample(i, 1);
      if (expo > 700.0) {
        expo = 700.0;
        clipped = true;
      }
      const double r = std::exp(expo) - 1.0;
      g(i, 0) = r;
      g(i, 1) = sample(i, 1) * r;
      for (int j = 2; j < q; ++j) g(i, j) = (sample(i, j) - 1.0) * r;
    }
    if (overflow) *overflow = clipped;
    return g;
  };
  return {1, q, std::move(eval)};
}

}  // namespace ael
