#include "ael/populations.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace ael {

namespace {

double mixture_central(const MixturePop& p, int order) {
  const double m = p.w * p.mu1 + (1.0 - p.w) * p.mu2;
  auto component = [order](double mu, double s, double m0) {
    const double d = mu - m0;
    const double s2 = s * s;
    switch (order) {
      case 2:
        return d * d + s2;
      case 3:
        return d * d * d + 3.0 * d * s2;
      case 4:
        return d * d * d * d + 6.0 * d * d * s2 + 3.0 * s2 * s2;
      default:
        throw InputError("unsupported mixture moment order");
    }
  };
  return p.w * component(p.mu1, p.s1, m) +
         (1.0 - p.w) * component(p.mu2, p.s2, m);
}

double draw_latent_coord(const LatentDPop& pop, int j, double d, Rng& rng) {
  switch (pop.variant) {
    case 'a':
      if (j == 0) return rng.normal(0.0, d);
      if (j == 1) return rng.gamma(1.0 / d, 1.0);
      return rng.chi_square(d);
    case 'b':
      if (j == 0) return rng.gamma(d, 1.0);
      if (j == 1) return rng.gamma(1.0 / d, 1.0);
      return rng.gamma(4.0 - d, 1.0);
    case 'c': {
      if (j == 2) return rng.normal(0.0, d);
      // Variances D^2 and D^-2 swap between the two coordinates.
      const double s_first = (j == 0) ? d : 1.0 / d;
      const double s_second = (j == 0) ? 1.0 / d : d;
      return (rng.uniform() < 0.2) ? rng.normal(5.0, s_first)
                                   : rng.normal(-1.25, s_second);
    }
    case 'd':
      if (j == 0) return static_cast<double>(rng.poisson(d));
      if (j == 1) return static_cast<double>(rng.poisson(1.0 / d));
      return static_cast<double>(rng.poisson(4.0 - d));
    default:
      throw InputError("latent-D variant must be one of a, b, c, d");
  }
}

}  // namespace

Matrix draw(const PopulationSpec& pop, int n, Rng& rng) {
  if (n < 1) throw InputError("sample size must be positive");
  return std::visit(
      [&](const auto& p) -> Matrix {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NormalPop>) {
          Matrix x(n, 1);
          for (int i = 0; i < n; ++i) x(i, 0) = rng.normal(p.mu, p.sigma);
          return x;
        } else if constexpr (std::is_same_v<T, ExponentialPop>) {
          Matrix x(n, 1);
          const double shift = p.centered ? 1.0 / p.rate : 0.0;
          for (int i = 0; i < n; ++i) x(i, 0) = rng.exponential(p.rate) - shift;
          return x;
        } else if constexpr (std::is_same_v<T, MixturePop>) {
          Matrix x(n, 1);
          for (int i = 0; i < n; ++i)
            x(i, 0) = (rng.uniform() < p.w) ? rng.normal(p.mu1, p.s1)
                                            : rng.normal(p.mu2, p.s2);
          return x;
        } else if constexpr (std::is_same_v<T, ChiSquarePop>) {
          Matrix x(n, 1);
          for (int i = 0; i < n; ++i) x(i, 0) = rng.chi_square(p.df);
          return x;
        } else if constexpr (std::is_same_v<T, LatentDPop>) {
          if (p.dims < 2 || p.dims > 3)
            throw InputError("latent-D configurations use 2 or 3 dimensions");
          Matrix x(n, p.dims);
          for (int i = 0; i < n; ++i) {
            const double d = rng.uniform(1.0, 2.0);
            for (int j = 0; j < p.dims; ++j)
              x(i, j) = draw_latent_coord(p, j, d, rng);
          }
          return x;
        } else if constexpr (std::is_same_v<T, LinRegPop>) {
          Matrix eps(n, 1);
          for (int i = 0; i < n; ++i)
            eps(i, 0) = p.normal_errors ? rng.normal()
                                        : rng.exponential(1.0) - 1.0;
          return eps;
        } else {
          static_assert(std::is_same_v<T, AssetPop>);
          Matrix x(n, p.q);
          for (int i = 0; i < n; ++i) {
            x(i, 0) = rng.normal(0.0, 0.4);  // N(0, 0.16)
            x(i, 1) = rng.normal(0.0, 0.4);
            for (int j = 2; j < p.q; ++j) x(i, j) = rng.chi_square(1.0);
          }
          return x;
        }
      },
      pop);
}

Vector true_theta(const PopulationSpec& pop) {
  return std::visit(
      [](const auto& p) -> Vector {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NormalPop>) {
          return Vector::Constant(1, p.mu);
        } else if constexpr (std::is_same_v<T, ExponentialPop>) {
          return Vector::Constant(1, p.centered ? 0.0 : 1.0 / p.rate);
        } else if constexpr (std::is_same_v<T, MixturePop>) {
          return Vector::Constant(1, p.w * p.mu1 + (1.0 - p.w) * p.mu2);
        } else if constexpr (std::is_same_v<T, ChiSquarePop>) {
          return Vector::Constant(1, p.df);
        } else if constexpr (std::is_same_v<T, LatentDPop>) {
          const double log2 = std::log(2.0);
          Vector full(3);
          switch (p.variant) {
            case 'a':
              full << 0.0, log2, 1.5;
              break;
            case 'b':
              full << 1.5, log2, 2.5;
              break;
            case 'c':
              full << 0.0, 0.0, 0.0;
              break;
            case 'd':
              full << 1.5, log2, 2.5;
              break;
            default:
              throw InputError("latent-D variant must be one of a, b, c, d");
          }
          return full.head(p.dims);
        } else if constexpr (std::is_same_v<T, LinRegPop>) {
          return p.beta0;
        } else {
          static_assert(std::is_same_v<T, AssetPop>);
          return Vector::Constant(1, 3.0);
        }
      },
      pop);
}

int population_dims(const PopulationSpec& pop) {
  return std::visit(
      [](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LatentDPop>)
          return p.dims;
        else if constexpr (std::is_same_v<T, LinRegPop>)
          return static_cast<int>(p.beta0.size());
        else if constexpr (std::is_same_v<T, AssetPop>)
          return p.q;
        else
          return 1;
      },
      pop);
}

std::optional<UnivariateMoments> univariate_moments(const PopulationSpec& pop) {
  return std::visit(
      [](const auto& p) -> std::optional<UnivariateMoments> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NormalPop>) {
          const double v = p.sigma * p.sigma;
          return UnivariateMoments{v, 0.0, 3.0 * v * v};
        } else if constexpr (std::is_same_v<T, ExponentialPop>) {
          const double m = 1.0 / p.rate;
          return UnivariateMoments{m * m, 2.0 * m * m * m, 9.0 * m * m * m * m};
        } else if constexpr (std::is_same_v<T, MixturePop>) {
          return UnivariateMoments{mixture_central(p, 2), mixture_central(p, 3),
                                   mixture_central(p, 4)};
        } else if constexpr (std::is_same_v<T, ChiSquarePop>) {
          const double k = p.df;
          return UnivariateMoments{2.0 * k, 8.0 * k, 12.0 * k * k + 48.0 * k};
        } else {
          return std::nullopt;
        }
      },
      pop);
}

std::optional<BartlettEstimate> closed_form_b(const PopulationSpec& pop) {
  const auto m = univariate_moments(pop);
  if (!m) return std::nullopt;
  return theoretical_b_univariate(m->alpha2, m->alpha3, m->alpha4);
}

BartlettEstimate latent_oracle_b(const LatentDPop& pop, long long draws,
                                 std::uint64_t seed) {
  if (draws < 1000) throw InputError("oracle needs a meaningful draw count");
  const int q = pop.dims;
  const PopulationSpec spec = pop;

  // Pass 1: mean and covariance.
  Vector mean = Vector::Zero(q);
  Matrix second = Matrix::Zero(q, q);
  {
    Rng rng = Rng::stream(seed, {0x0A11CE});
    for (long long i = 0; i < draws; ++i) {
      const Matrix row = draw(spec, 1, rng);
      mean += row.row(0).transpose();
      second += row.row(0).transpose() * row.row(0);
    }
    mean /= static_cast<double>(draws);
    second /= static_cast<double>(draws);
  }
  Matrix cov = second - mean * mean.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  Matrix rot(q, q);
  for (int j = 0; j < q; ++j) rot.col(j) = eig.eigenvectors().col(q - 1 - j);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < q; ++i)
      if (std::fabs(rot(i, j)) > 1e-12) {
        if (rot(i, j) < 0.0) rot.col(j) *= -1.0;
        break;
      }

  // Pass 2 over the same stream: rotated central moments up to order 4.
  const auto multisets = moment_multisets(q, 2, 4);
  std::vector<double> sums(multisets.size(), 0.0);
  {
    Rng rng = Rng::stream(seed, {0x0A11CE});
    for (long long i = 0; i < draws; ++i) {
      const Matrix row = draw(spec, 1, rng);
      const Vector y = rot.transpose() * (row.row(0).transpose() - mean);
      for (size_t k = 0; k < multisets.size(); ++k) {
        double prod = 1.0;
        for (int c : multisets[k]) prod *= y[c - 1];
        sums[k] += prod;
      }
    }
  }
  const long long cap = std::numeric_limits<int>::max();
  MomentTable table(q, static_cast<int>(std::min(draws, cap)), 4);
  for (size_t k = 0; k < multisets.size(); ++k)
    table.set(multisets[k], sums[k] / static_cast<double>(draws));

  BartlettEstimate est = b_from_moments(table);
  est.method = BMethod::Theoretical;
  est.n_used = 0;
  return est;
}

BartlettEstimate linreg_design_b(const MatrixRef& design, bool normal_errors) {
  const int p = static_cast<int>(design.cols());
  const auto n = static_cast<double>(design.rows());
  const double mu2 = 1.0;
  const double mu3 = normal_errors ? 0.0 : 2.0;
  const double mu4 = normal_errors ? 3.0 : 9.0;

  Matrix v = mu2 * (design.transpose() * design) / n;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(v);
  Matrix rot(p, p);
  for (int j = 0; j < p; ++j) rot.col(j) = eig.eigenvectors().col(p - 1 - j);
  const Matrix c = design * rot;  // rows are P^T x_i

  MomentTable table(p, static_cast<int>(design.rows()), 4);
  std::vector<int> scratch;
  std::function<void(int, int)> fill = [&](int order, int start) {
    if (static_cast<int>(scratch.size()) == order) {
      double avg = 0.0;
      for (Eigen::Index i = 0; i < design.rows(); ++i) {
        double prod = 1.0;
        for (int idx : scratch) prod *= c(i, idx - 1);
        avg += prod;
      }
      avg /= n;
      const double mu = (order == 2) ? mu2 : (order == 3 ? mu3 : mu4);
      table.set(scratch, mu * avg);
      return;
    }
    for (int idx = start; idx <= p; ++idx) {
      scratch.push_back(idx);
      fill(order, idx);
      scratch.pop_back();
    }
  };
  for (int order = 2; order <= 4; ++order) fill(order, 1);

  BartlettEstimate est = b_from_moments(table);
  est.method = BMethod::Theoretical;
  est.n_used = 0;
  return est;
}

}  // namespace ael
