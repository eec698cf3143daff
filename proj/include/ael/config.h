#pragma once

#include "ael/simlab.h"

#include <string>

namespace ael {

// Experiment description parsed from flat key = value text with repeated
// [cell] sections. Global keys: kind, master_seed, replications, threads,
// levels, methods, boot_B, offline_b, trim, oracle_draws, design_file,
// out, format. Cell keys: population, n. Levels above 1 are read as
// percentages.
struct ExperimentConfig {
  std::string kind = "coverage";  // coverage | bartlett
  SimConfig sim;
  std::string out_path;     // empty: stdout
  std::string format = "csv";
  std::string design_file;  // as written in the config
};

// Population labels: normal, exp1, mixture, chisq1, latent-{a..d}-{2,3},
// linreg-normal, linreg-exp, asset-<q>.
PopulationSpec parse_population(const std::string& id);

// Validation problems are collected and reported together.
ExperimentConfig parse_config(const std::string& text,
                              const std::string& base_dir = "");
ExperimentConfig read_config_file(const std::string& path);

std::string serialize_config(const ExperimentConfig& config);

}  // namespace ael
