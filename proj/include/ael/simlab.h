#pragma once

#include "ael/populations.h"
#include "ael/types.h"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ael {

// Method labels understood by the simulation engine. Suffixes follow the
// source of the Bartlett factor: plain = naive moments, '*' = reduced-bias,
// 't' = true/off-line value, 'b' = bootstrap.
enum class SimMethodId { T2, F, EL, BEL, AEL, BELs, AELs, BELt, AELt, AEL0, BELb, AELb };

SimMethodId parse_method(const std::string& name);
std::string method_name(SimMethodId id);

struct PopulationEntry {
  std::string id;
  PopulationSpec spec;
};

struct CoverageCell {
  int population_index = 0;
  int n = 0;
};

struct SimConfig {
  std::vector<PopulationEntry> populations;
  std::vector<CoverageCell> cells;
  std::vector<double> levels;  // probabilities in (0, 1)
  std::vector<SimMethodId> methods;
  int replications = 1000;
  std::uint64_t master_seed = 1;
  int threads = 1;
  int bootstrap_B = 300;
  std::optional<double> offline_b;  // BELt/AELt value for the asset model
  int trim = 0;                     // anchor-mean trim (asset model)
  long long oracle_draws = 1000000; // latent-D truth plug-in size
  Matrix design;                    // regression design (rows >= max cell n)
};

struct CoverageRow {
  std::string method;
  double level = 0.0;
  int n = 0;
  std::string population;
  double coverage = 0.0;
  double mc_se = 0.0;
  int replications = 0;
  int infeasible = 0;
  int failures = 0;
  std::uint64_t master_seed = 0;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  std::uint64_t master_seed = 0;
};

// Monte Carlo coverage of the configured methods at the true parameter.
// Every method within a cell sees identical data (per-replication streams
// keyed by population, n and replication index); an empty EL constraint
// set at theta0 counts as non-coverage. Results are independent of the
// thread count.
CoverageReport coverage_experiment(const SimConfig& config);

struct BartlettBiasRow {
  std::string population;
  int n = 0;
  double mean_naive = 0.0;
  double mean_reduced = 0.0;
  double b_true = 0.0;
  bool simulated_truth = false;
  int replications = 0;
  int failures = 0;
  std::uint64_t master_seed = 0;
};

struct BartlettBiasReport {
  std::vector<BartlettBiasRow> rows;
};

// Mean naive and reduced-bias factor estimates against the population
// value (closed form where available, otherwise the plug-in oracle).
BartlettBiasReport bartlett_bias_experiment(const SimConfig& config);

}  // namespace ael
