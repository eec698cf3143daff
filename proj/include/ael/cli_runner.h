#pragma once

#include "ael/config.h"
#include "ael/types.h"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ael {

// Exit codes shared by the CLI: 0 success, 1 usage/data error,
// 2 empty EL constraint set (statistic infinite).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;

struct EvalArgs {
  std::string data_path;
  std::string model = "mean";   // mean | linreg | asset
  std::string design_path;      // linreg only
  std::vector<double> theta0;
  std::string method = "EL";
  std::vector<double> levels = {0.95};
  double b_value = 0.0;         // BELt / AELt
  int bootstrap_B = 300;
  int trim = 0;
  std::uint64_t seed = 1;
};

int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

// kind must match the subcommand ("coverage" or "bartlett"). Writes CSV or
// an aligned table to config.out_path (stdout when empty).
int run_experiment(const ExperimentConfig& config, const std::string& kind,
                   std::ostream& out, std::ostream& err);

struct BootstrapBArgs {
  std::string data_path;
  std::string model = "asset-2";
  std::vector<double> theta0;  // empty: estimate from the data
  int bootstrap_B = 300;
  int trim = 0;
  std::uint64_t seed = 1;
};

int run_bootstrap_b(const BootstrapBArgs& args, std::ostream& out,
                    std::ostream& err);

}  // namespace ael
