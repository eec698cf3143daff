#include "ael/cli_runner.h"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Empirical likelihood inference and simulation lab"};
  app.require_subcommand(1);

  ael::EvalArgs eval_args;
  auto* eval = app.add_subcommand(
      "eval", "Evaluate a likelihood-ratio statistic on a data file");
  eval->add_option("--data", eval_args.data_path, "whitespace-separated matrix")
      ->required();
  eval->add_option("--model", eval_args.model, "mean | linreg | asset[-q]");
  eval->add_option("--design", eval_args.design_path, "design matrix (linreg)");
  eval->add_option("--theta0", eval_args.theta0, "hypothesized parameter")
      ->required()
      ->expected(-1);
  eval->add_option("--method", eval_args.method,
                   "T2 F EL BEL AEL BEL* AEL* BELt AELt AEL0 BELb AELb");
  eval->add_option("--level", eval_args.levels, "confidence level(s)")
      ->expected(-1);
  eval->add_option("--b", eval_args.b_value, "factor value for BELt/AELt");
  eval->add_option("--B", eval_args.bootstrap_B, "bootstrap resamples");
  eval->add_option("--trim", eval_args.trim, "anchor-mean trim count");
  eval->add_option("--seed", eval_args.seed, "bootstrap seed");

  std::string coverage_config, coverage_out, coverage_format;
  int coverage_threads = 0;
  std::uint64_t coverage_seed = 0;
  bool coverage_seed_set = false;
  auto* coverage =
      app.add_subcommand("coverage", "Monte Carlo coverage experiment");
  coverage->add_option("--config", coverage_config, "experiment config file")
      ->required();
  coverage->add_option("--out", coverage_out, "output file (default stdout)");
  coverage->add_option("--format", coverage_format, "csv | table");
  coverage->add_option("--threads", coverage_threads, "worker threads");
  coverage->add_option("--seed", coverage_seed, "master seed override")
      ->each([&](const std::string&) { coverage_seed_set = true; });

  std::string bias_config, bias_out, bias_format;
  int bias_threads = 0;
  std::uint64_t bias_seed = 0;
  bool bias_seed_set = false;
  auto* bartlett =
      app.add_subcommand("bartlett", "Factor-bias Monte Carlo experiment");
  bartlett->add_option("--config", bias_config, "experiment config file")
      ->required();
  bartlett->add_option("--out", bias_out, "output file (default stdout)");
  bartlett->add_option("--format", bias_format, "csv | table");
  bartlett->add_option("--threads", bias_threads, "worker threads");
  bartlett->add_option("--seed", bias_seed, "master seed override")
      ->each([&](const std::string&) { bias_seed_set = true; });

  ael::BootstrapBArgs boot_args;
  auto* boot = app.add_subcommand(
      "bootstrap-b", "Bootstrap Bartlett-factor estimate on a data file");
  boot->add_option("--data", boot_args.data_path, "whitespace-separated matrix")
      ->required();
  boot->add_option("--model", boot_args.model, "asset-q (or any q > p model)");
  boot->add_option("--theta0", boot_args.theta0,
                   "anchor parameter (default: estimated)")
      ->expected(-1);
  boot->add_option("--B", boot_args.bootstrap_B, "bootstrap resamples");
  boot->add_option("--trim", boot_args.trim, "anchor-mean trim count");
  boot->add_option("--seed", boot_args.seed, "resampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval->parsed()) return ael::run_eval(eval_args, std::cout, std::cerr);
    if (boot->parsed())
      return ael::run_bootstrap_b(boot_args, std::cout, std::cerr);

    const bool is_coverage = coverage->parsed();
    ael::ExperimentConfig config = ael::read_config_file(
        is_coverage ? coverage_config : bias_config);
    const std::string& out_path = is_coverage ? coverage_out : bias_out;
    const std::string& format = is_coverage ? coverage_format : bias_format;
    const int threads = is_coverage ? coverage_threads : bias_threads;
    if (!out_path.empty()) config.out_path = out_path;
    if (!format.empty()) config.format = format;
    if (threads > 0) config.sim.threads = threads;
    if (is_coverage && coverage_seed_set) config.sim.master_seed = coverage_seed;
    if (!is_coverage && bias_seed_set) config.sim.master_seed = bias_seed;
    return ael::run_experiment(config, is_coverage ? "coverage" : "bartlett",
                               std::cout, std::cerr);
  } catch (const ael::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ael::kExitUsage;
  }
}
