#pragma once

#include "ael/bartlett.h"
#include "ael/rng.h"
#include "ael/types.h"

#include <optional>
#include <string>
#include <variant>

namespace ael {

// Sampling populations of the simulation lab. LatentD draws a fresh
// D ~ U[1, 2] per observation and then the per-variant marginals; the
// regression population pairs a fixed design with an error law; the asset
// population feeds the expanded asset-pricing scores.
struct NormalPop {
  double mu = 0.0;
  double sigma = 1.0;
};
struct ExponentialPop {
  double rate = 1.0;
  bool centered = false;
};
struct MixturePop {
  double w = 0.2;
  double mu1 = 5.0;
  double s1 = 1.0;
  double mu2 = -1.25;
  double s2 = 1.0;
};
struct ChiSquarePop {
  double df = 1.0;
};
struct LatentDPop {
  char variant = 'a';  // 'a'..'d'
  int dims = 2;        // 2 or 3
};
struct LinRegPop {
  Vector beta0;
  bool normal_errors = true;  // false: centered Exp(1)
};
struct AssetPop {
  int q = 2;
};

using PopulationSpec = std::variant<NormalPop, ExponentialPop, MixturePop,
                                    ChiSquarePop, LatentDPop, LinRegPop, AssetPop>;

// n rows from the population. LinRegPop draws errors only; responses are
// formed against a design by the caller (see simlab).
Matrix draw(const PopulationSpec& pop, int n, Rng& rng);

// The true parameter targeted by the matching estimating function.
Vector true_theta(const PopulationSpec& pop);

int population_dims(const PopulationSpec& pop);

// Central moments (order 2, 3, 4) of a scalar population, closed form.
struct UnivariateMoments {
  double alpha2;
  double alpha3;
  double alpha4;
};
std::optional<UnivariateMoments> univariate_moments(const PopulationSpec& pop);

// Population Bartlett factor where closed forms exist (univariate kinds).
std::optional<BartlettEstimate> closed_form_b(const PopulationSpec& pop);

// Simulated-truth Bartlett factor for the latent-D configurations: moment
// plug-in over `draws` streamed observations (two passes, fixed stream).
BartlettEstimate latent_oracle_b(const LatentDPop& pop, long long draws,
                                 std::uint64_t seed);

// Analytic factor for a fixed-design regression: score moments reduce to
// error moments times design averages, so no simulation is needed.
BartlettEstimate linreg_design_b(const MatrixRef& design, bool normal_errors);

}  // namespace ael
