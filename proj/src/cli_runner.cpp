#include "ael/cli_runner.h"

#include "ael/bartlett.h"
#include "ael/distributions.h"
#include "ael/el.h"
#include "ael/inference.h"
#include "ael/io.h"
#include "ael/models.h"

#include <cmath>
#include <iostream>
#include <optional>

namespace ael {

namespace {

struct EvalModel {
  std::optional<EstimatingFunction> gee;
  Matrix sample;
};

EvalModel load_model(const std::string& model, const std::string& data_path,
                     const std::string& design_path) {
  EvalModel out;
  out.sample = read_matrix_file(data_path);
  if (model == "mean") {
    out.gee = mean_model(static_cast<int>(out.sample.cols()));
  } else if (model == "linreg") {
    if (design_path.empty())
      throw InputError("linreg model needs --design <file>");
    out.gee = linreg_model(read_matrix_file(design_path));
  } else if (model.rfind("asset", 0) == 0) {
    int q = static_cast<int>(out.sample.cols());
    if (model.size() > 6 && model[5] == '-') q = std::stoi(model.substr(6));
    out.gee = asset_model(q);
  } else {
    throw InputError("unknown model: " + model);
  }
  return out;
}

MethodSpec make_method_spec(const std::string& name, double b_value, int B,
                            int trim, std::uint64_t seed) {
  MethodSpec spec;
  spec.trim_count = trim;
  spec.bootstrap_seed = seed;
  const SimMethodId id = parse_method(name);
  switch (id) {
    case SimMethodId::T2:
      spec.kind = MethodKind::Hotelling;
      break;
    case SimMethodId::F:
      spec.kind = MethodKind::FTest;
      break;
    case SimMethodId::EL:
      spec.kind = MethodKind::EL;
      break;
    case SimMethodId::AEL0:
      spec.kind = MethodKind::AEL0;
      break;
    case SimMethodId::BEL:
      spec.kind = MethodKind::BEL;
      spec.b_source = BSource::naive_moment();
      break;
    case SimMethodId::AEL:
      spec.kind = MethodKind::AEL;
      spec.b_source = BSource::naive_moment();
      break;
    case SimMethodId::BELs:
      spec.kind = MethodKind::BEL;
      spec.b_source = BSource::bias_reduced();
      break;
    case SimMethodId::AELs:
      spec.kind = MethodKind::AEL;
      spec.b_source = BSource::bias_reduced();
      break;
    case SimMethodId::BELt:
      spec.kind = MethodKind::BEL;
      spec.b_source = BSource::theoretical(b_value);
      break;
    case SimMethodId::AELt:
      spec.kind = MethodKind::AEL;
      spec.b_source = BSource::theoretical(b_value);
      break;
    case SimMethodId::BELb:
      spec.kind = MethodKind::BEL;
      spec.b_source = BSource::bootstrap(B);
      break;
    case SimMethodId::AELb:
      spec.kind = MethodKind::AEL;
      spec.b_source = BSource::bootstrap(B);
      break;
  }
  return spec;
}

}  // namespace

int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const EvalModel model = load_model(args.model, args.data_path,
                                       args.design_path);
    const auto& gee = *model.gee;
    if (static_cast<int>(args.theta0.size()) != gee.p())
      throw InputError("--theta0 must have " + std::to_string(gee.p()) +
                       " component(s)");
    Vector theta0(gee.p());
    for (int i = 0; i < gee.p(); ++i) theta0[i] = args.theta0[i];

    const MethodSpec spec = make_method_spec(args.method, args.b_value,
                                             args.bootstrap_B, args.trim,
                                             args.seed);
    const Matrix g0 = gee(model.sample, theta0);

    double stat;
    int df;
    bool f_calibrated = false;
    if (spec.kind == MethodKind::Hotelling) {
      const Eigen::Index n = model.sample.rows();
      const Eigen::Index p = model.sample.cols();
      const Vector mean = model.sample.colwise().mean();
      const Matrix centered = model.sample.rowwise() - mean.transpose();
      const Matrix s =
          centered.transpose() * centered / static_cast<double>(n - 1);
      const Vector diff = mean - theta0;
      const double t2 =
          static_cast<double>(n) * diff.dot(s.ldlt().solve(diff));
      stat = static_cast<double>(n - p) * t2 /
             (static_cast<double>(p) * static_cast<double>(n - 1));
      df = static_cast<int>(p);
      f_calibrated = true;
    } else if (gee.q() > gee.p()) {
      df = gee.p();
      if (spec.kind == MethodKind::EL) {
        stat = delta_statistic(model.sample, gee, theta0, Adjustment::none());
      } else {
        const Vector theta_hat = max_el_estimate(
            model.sample, gee,
            Adjustment::single(conventional_level(model.sample.rows()),
                               args.trim),
            theta0);
        std::vector<int> excluded;
        if (args.trim > 0)
          excluded = largest_norm_rows(gee(model.sample, theta_hat), args.trim);
        if (spec.kind == MethodKind::AEL0) {
          const Adjustment adj =
              Adjustment::single(conventional_level(model.sample.rows()))
                  .with_fixed_anchor(excluded);
          stat = delta_statistic(model.sample, gee, theta0, adj, theta_hat);
        } else {
          const ResolvedAdjustment res = resolve_adjustment(
              gee(model.sample, theta_hat), spec.b_source, 0, model.sample,
              gee, theta_hat, args.seed);
          if (spec.kind == MethodKind::AEL)
            stat = delta_statistic(model.sample, gee, theta0,
                                   res.adjustment.with_fixed_anchor(excluded),
                                   theta_hat);
          else
            stat = delta_statistic(model.sample, gee, theta0,
                                   Adjustment::none(), theta_hat) /
                   std::max(1.0 + res.b / model.sample.rows(), 1e-8);
        }
      }
    } else {
      stat = el_statistic(model.sample, gee, theta0, spec);
      df = gee.q();
    }

    out << "statistic " << format_number(stat) << "\n";
    {
      const DualSolution dual = solve_dual(g0);
      out << "dual status ";
      switch (dual.status) {
        case DualStatus::Converged:
          out << "converged";
          break;
        case DualStatus::Infeasible:
          out << "infeasible";
          break;
        case DualStatus::MaxIterations:
          out << "max-iterations";
          break;
      }
      out << " iterations " << dual.iterations << " residual "
          << format_number(dual.residual_norm) << "\n";
      if (dual.status == DualStatus::Converged) {
        out << "lambda";
        for (Eigen::Index j = 0; j < dual.lambda.size(); ++j)
          out << ' ' << format_number(dual.lambda[j]);
        out << "\n";
      }
    }
    for (double level : args.levels) {
      const double cutoff = f_calibrated
                                ? f_quantile(level, df,
                                             static_cast<int>(model.sample.rows()) - df)
                                : chi2_quantile(level, df);
      out << "level " << format_number(level) << " cutoff "
          << format_number(cutoff) << ' '
          << ((stat <= cutoff) ? "cover" : "reject") << "\n";
    }
    return std::isfinite(stat) ? kExitOk : kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run_experiment(const ExperimentConfig& config, const std::string& kind,
                   std::ostream& out, std::ostream& err) {
  try {
    if (config.kind != kind)
      throw InputError("config kind is '" + config.kind + "', expected '" +
                       kind + "'");
    std::string rendered;
    if (kind == "coverage") {
      const CoverageReport report = coverage_experiment(config.sim);
      rendered = (config.format == "table") ? coverage_table(report)
                                            : coverage_csv(report);
    } else {
      const BartlettBiasReport report = bartlett_bias_experiment(config.sim);
      rendered = (config.format == "table") ? bartlett_table(report)
                                            : bartlett_csv(report);
    }
    if (config.out_path.empty())
      out << rendered;
    else
      write_text_file(config.out_path, rendered);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run_bootstrap_b(const BootstrapBArgs& args, std::ostream& out,
                    std::ostream& err) {
  try {
    const EvalModel model = load_model(args.model, args.data_path, "");
    const auto& gee = *model.gee;
    Vector theta_hat(gee.p());
    if (args.theta0.empty()) {
      const Adjustment adj =
          Adjustment::single(conventional_level(model.sample.rows()), args.trim);
      // The profile can have spurious local basins; scan coarsely for the
      // best starting point before refining.
      Vector init = Vector::Zero(gee.p());
      if (gee.p() == 1) {
        double best = kInf;
        for (int k = -40; k <= 40; ++k) {
          const Vector probe = Vector::Constant(1, 0.5 * k);
          try {
            const double v = ael_log_ratio(gee(model.sample, probe), adj).log_ratio;
            if (v < best) {
              best = v;
              init = probe;
            }
          } catch (const Error&) {
          }
        }
      }
      theta_hat = max_el_estimate(model.sample, gee, adj, init);
    } else {
      if (static_cast<int>(args.theta0.size()) != gee.p())
        throw InputError("--theta0 must have " + std::to_string(gee.p()) +
                         " component(s)");
      for (int i = 0; i < gee.p(); ++i) theta_hat[i] = args.theta0[i];
    }
    const BartlettEstimate est =
        bootstrap_b(model.sample, gee, theta_hat, args.bootstrap_B, args.seed);
    out << "theta_hat";
    for (int i = 0; i < gee.p(); ++i) out << ' ' << format_number(theta_hat[i]);
    out << "\nb_hat " << format_number(est.b) << "\nfeasible "
        << est.feasible_resamples << " dropped " << est.dropped_resamples
        << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace ael
