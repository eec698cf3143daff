#include "ael/simlab.h"

#include "ael/distributions.h"
#include "ael/el.h"
#include "ael/inference.h"
#include "ael/models.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <thread>

namespace ael {

namespace {

enum class Family { Mean, LinReg, Asset };

Family family_of(const PopulationSpec& pop) {
  if (std::holds_alternative<LinRegPop>(pop)) return Family::LinReg;
  if (std::holds_alternative<AssetPop>(pop)) return Family::Asset;
  return Family::Mean;
}

bool method_allowed(Family family, SimMethodId m) {
  switch (family) {
    case Family::Mean:
      return m != SimMethodId::F && m != SimMethodId::BELb &&
             m != SimMethodId::AELb;
    case Family::LinReg:
      return m != SimMethodId::T2 && m != SimMethodId::BELb &&
             m != SimMethodId::AELb;
    case Family::Asset:
      switch (m) {
        case SimMethodId::EL:
        case SimMethodId::BELb:
        case SimMethodId::AELb:
        case SimMethodId::BELt:
        case SimMethodId::AELt:
        case SimMethodId::AEL0:
          return true;
        default:
          return false;
      }
  }
  return false;
}

// Stream tags: 1 = sample data, 2 = bootstrap, 3 = truth oracle.
constexpr std::uint64_t kTagData = 1;
constexpr std::uint64_t kTagBootstrap = 2;
constexpr std::uint64_t kTagOracle = 3;

struct CellContext {
  const PopulationEntry* pop = nullptr;
  int pop_index = 0;
  int n = 0;
  Family family = Family::Mean;
  std::optional<EstimatingFunction> gee;
  Vector theta0;
  Matrix design;  // linreg rows for this n
  std::optional<BartlettEstimate> truth;
  double conv_a = 1.0;
};

struct RepTally {
  // covers[m * levels + l], plus per-method infeasible/failure marks.
  std::vector<std::uint8_t> covers;
  std::vector<std::uint8_t> infeasible;
  std::vector<std::uint8_t> failed;
};

void run_in_chunks(int total, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, total));
  if (threads == 1) {
    for (int i = 0; i < total; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
  const int chunk = (total + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(total, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, t, &body, &errors] {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[static_cast<size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

BSource source_for(SimMethodId m, const std::optional<BartlettEstimate>& truth,
                   int bootstrap_B) {
  switch (m) {
    case SimMethodId::BEL:
    case SimMethodId::AEL:
      return BSource::naive_moment();
    case SimMethodId::BELs:
    case SimMethodId::AELs:
      return BSource::bias_reduced();
    case SimMethodId::BELt:
    case SimMethodId::AELt: {
      if (!truth)
        throw InputError("no population Bartlett factor available for this cell");
      std::optional<double> b1, b2;
      if (truth->has_components && truth->b1 > 0.0 && truth->b2 > 0.0) {
        b1 = truth->b1;
        b2 = truth->b2;
      }
      return BSource::theoretical(truth->b, b1, b2);
    }
    case SimMethodId::BELb:
    case SimMethodId::AELb:
      return BSource::bootstrap(bootstrap_B);
    default:
      return BSource::none();
  }
}

bool is_bel(SimMethodId m) {
  return m == SimMethodId::BEL || m == SimMethodId::BELs ||
         m == SimMethodId::BELt || m == SimMethodId::BELb;
}

// Coverage decisions for the just-identified families (mean, regression):
// the statistic is the full-vector log ratio against chi-square(q) cutoffs.
void just_identified_rep(const CellContext& ctx, const SimConfig& config,
                         const std::vector<double>& chi2_cutoffs,
                         const Matrix& sample, RepTally& tally) {
  const auto& gee = *ctx.gee;
  const size_t n_levels = config.levels.size();
  const Matrix g0 = gee(sample, ctx.theta0);

  double r_el = kInf;
  bool r_failed = false;
  try {
    r_el = el_log_ratio(g0).log_ratio;
  } catch (const Error&) {
    r_failed = true;
  }

  const Vector theta_hat = *gee.closed_form_estimate(sample);
  const Matrix g_hat = gee(sample, theta_hat);

  std::map<int, ResolvedAdjustment> cache;
  auto resolved = [&](SimMethodId m) -> const ResolvedAdjustment& {
    const BSource src = source_for(m, ctx.truth, config.bootstrap_B);
    const int key = static_cast<int>(src.kind);
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(key, resolve_adjustment(g_hat, src, 0, sample, gee,
                                                 theta_hat, 0))
               .first;
    return it->second;
  };

  for (size_t mi = 0; mi < config.methods.size(); ++mi) {
    const SimMethodId m = config.methods[mi];
    try {
      if (m == SimMethodId::T2) {
        for (size_t l = 0; l < n_levels; ++l)
          tally.covers[mi * n_levels + l] =
              hotelling_covers(sample, ctx.theta0, config.levels[l]) ? 1 : 0;
        continue;
      }
      if (m == SimMethodId::F) {
        for (size_t l = 0; l < n_levels; ++l)
          tally.covers[mi * n_levels + l] =
              ftest_covers(sample, ctx.design, ctx.theta0, config.levels[l]) ? 1 : 0;
        continue;
      }

      double stat;
      if (m == SimMethodId::EL) {
        if (r_failed) throw SolverError("empirical likelihood dual stalled", {});
        stat = r_el;
        if (!std::isfinite(stat)) tally.infeasible[mi] = 1;
      } else if (m == SimMethodId::AEL0) {
        stat = ael_log_ratio(g0, Adjustment::single(ctx.conv_a)).log_ratio;
        if (!std::isfinite(stat)) tally.infeasible[mi] = 1;
      } else if (is_bel(m)) {
        if (r_failed) throw SolverError("empirical likelihood dual stalled", {});
        stat = r_el / std::max(1.0 + resolved(m).b / ctx.n, 1e-8);
        if (!std::isfinite(stat)) tally.infeasible[mi] = 1;
      } else {  // AEL variants
        stat = ael_log_ratio(g0, resolved(m).adjustment).log_ratio;
        if (!std::isfinite(stat)) tally.infeasible[mi] = 1;
      }
      for (size_t l = 0; l < n_levels; ++l)
        tally.covers[mi * n_levels + l] = (stat <= chi2_cutoffs[l]) ? 1 : 0;
    } catch (const Error&) {
      tally.failed[mi] = 1;
    }
  }
}

// Over-identified asset cell: profile statistics against chi-square(p).
void asset_rep(const CellContext& ctx, const SimConfig& config,
               const std::vector<double>& chi2_cutoffs, const Matrix& sample,
               std::uint64_t bootstrap_seed, RepTally& tally) {
  const auto& gee = *ctx.gee;
  const size_t n_levels = config.levels.size();

  auto fail_all = [&] {
    for (size_t mi = 0; mi < config.methods.size(); ++mi) tally.failed[mi] = 1;
  };

  bool overflow = false;
  (void)gee(sample, ctx.theta0, &overflow);
  if (overflow) {  // unstable scores: reject the replication outright
    fail_all();
    return;
  }

  Vector theta_hat;
  std::vector<int> excluded;
  try {
    theta_hat = max_el_estimate(
        sample, gee, Adjustment::single(ctx.conv_a, config.trim), ctx.theta0);
    // The outlying observations are identified once, at the estimate, and
    // the anchor mean then excludes those rows at every theta.
    if (config.trim > 0)
      excluded = largest_norm_rows(gee(sample, theta_hat), config.trim);
  } catch (const Error&) {
    fail_all();
    return;
  }

  const bool wants_plain_delta =
      std::any_of(config.methods.begin(), config.methods.end(), [](SimMethodId m) {
        return m == SimMethodId::EL || is_bel(m);
      });
  double delta0 = kInf;
  bool delta0_failed = false;
  if (wants_plain_delta) {
    try {
      delta0 = delta_statistic(sample, gee, ctx.theta0, Adjustment::none(),
                               theta_hat);
    } catch (const Error&) {
      delta0_failed = true;
    }
  }

  const bool wants_bootstrap =
      std::any_of(config.methods.begin(), config.methods.end(), [](SimMethodId m) {
        return m == SimMethodId::BELb || m == SimMethodId::AELb;
      });
  std::optional<BartlettEstimate> boot;
  bool boot_failed = false;
  if (wants_bootstrap) {
    try {
      boot = bootstrap_b(sample, gee, theta_hat, config.bootstrap_B,
                         bootstrap_seed);
    } catch (const Error&) {
      boot_failed = true;
    }
  }

  auto scalar_b = [&](SimMethodId m) -> double {
    if (m == SimMethodId::BELb || m == SimMethodId::AELb) return boot->b;
    return *config.offline_b;
  };

  for (size_t mi = 0; mi < config.methods.size(); ++mi) {
    const SimMethodId m = config.methods[mi];
    try {
      if ((m == SimMethodId::BELb || m == SimMethodId::AELb) && boot_failed)
        throw ReliabilityError("bootstrap factor unavailable", 0,
                               config.bootstrap_B);

      double stat;
      if (m == SimMethodId::EL || is_bel(m)) {
        if (delta0_failed)
          throw SolverError("profile statistic unavailable", {});
        stat = (m == SimMethodId::EL)
                   ? delta0
                   : delta0 / std::max(1.0 + scalar_b(m) / ctx.n, 1e-8);
        if (!std::isfinite(stat)) tally.infeasible[mi] = 1;
      } else {
        Adjustment adj = Adjustment::single(ctx.conv_a);
        if (m != SimMethodId::AEL0) {
          const double b = scalar_b(m);
          adj = (b > 0.0) ? Adjustment::single(0.5 * b)
                          : Adjustment::two_point(0.5, 0.5 * (1.0 - b));
        }
        adj = adj.with_fixed_anchor(excluded);
        stat = delta_statistic(sample, gee, ctx.theta0, adj, theta_hat);
        if (!std::isfinite(stat)) tally.infeasible[mi] = 1;
      }
      for (size_t l = 0; l < n_levels; ++l)
        tally.covers[mi * n_levels + l] = (stat <= chi2_cutoffs[l]) ? 1 : 0;
    } catch (const Error&) {
      tally.failed[mi] = 1;
    }
  }
}

CellContext make_context(const SimConfig& config, const CoverageCell& cell,
                         bool need_truth) {
  CellContext ctx;
  ctx.pop = &config.populations.at(cell.population_index);
  ctx.pop_index = cell.population_index;
  ctx.n = cell.n;
  ctx.family = family_of(ctx.pop->spec);
  ctx.theta0 = true_theta(ctx.pop->spec);
  ctx.conv_a = conventional_level(cell.n);

  switch (ctx.family) {
    case Family::Mean:
      ctx.gee = mean_model(population_dims(ctx.pop->spec));
      break;
    case Family::LinReg: {
      if (config.design.rows() < cell.n)
        throw InputError("design matrix has fewer rows than the cell sample size");
      ctx.design = config.design.topRows(cell.n);
      ctx.gee = linreg_model(ctx.design);
      break;
    }
    case Family::Asset:
      ctx.gee = asset_model(population_dims(ctx.pop->spec));
      break;
  }

  if (need_truth) {
    if (ctx.family == Family::Asset) {
      if (!config.offline_b)
        throw InputError("asset-model t-methods need an off-line b value");
      BartlettEstimate est;
      est.b = *config.offline_b;
      est.method = BMethod::Theoretical;
      ctx.truth = est;
    } else if (ctx.family == Family::LinReg) {
      const auto& pop = std::get<LinRegPop>(ctx.pop->spec);
      ctx.truth = linreg_design_b(ctx.design, pop.normal_errors);
    } else if (const auto* latent = std::get_if<LatentDPop>(&ctx.pop->spec)) {
      ctx.truth = latent_oracle_b(
          *latent, config.oracle_draws,
          Rng::derive_seed(config.master_seed,
                           {kTagOracle, static_cast<std::uint64_t>(ctx.pop_index)}));
    } else {
      ctx.truth = closed_form_b(ctx.pop->spec);
      if (!ctx.truth)
        throw InputError("no closed-form Bartlett factor for this population");
    }
  }
  return ctx;
}

void validate_common(const SimConfig& config) {
  if (config.replications < 100)
    throw InputError("coverage experiments need at least 100 replications");
  if (config.cells.empty()) throw InputError("no cells configured");
  if (config.threads < 1) throw InputError("thread count must be positive");
  for (double level : config.levels)
    if (!(level > 0.0 && level < 1.0))
      throw InputError("levels must be probabilities in (0, 1)");
  for (const auto& cell : config.cells) {
    if (cell.population_index < 0 ||
        cell.population_index >= static_cast<int>(config.populations.size()))
      throw InputError("cell references an unknown population");
    if (cell.n < 2) throw InputError("cell sample size is too small");
  }
}

Matrix draw_sample(const CellContext& ctx, const SimConfig& config, int rep) {
  Rng rng = Rng::stream(config.master_seed,
                        {kTagData, static_cast<std::uint64_t>(ctx.pop_index),
                         static_cast<std::uint64_t>(ctx.n),
                         static_cast<std::uint64_t>(rep)});
  Matrix drawn = draw(ctx.pop->spec, ctx.n, rng);
  if (ctx.family == Family::LinReg)
    return ctx.design * ctx.theta0 + drawn.col(0);
  return drawn;
}

}  // namespace

SimMethodId parse_method(const std::string& name) {
  static const std::map<std::string, SimMethodId> table = {
      {"T2", SimMethodId::T2},     {"F", SimMethodId::F},
      {"EL", SimMethodId::EL},     {"BEL", SimMethodId::BEL},
      {"AEL", SimMethodId::AEL},   {"BEL*", SimMethodId::BELs},
      {"AEL*", SimMethodId::AELs}, {"BELt", SimMethodId::BELt},
      {"AELt", SimMethodId::AELt}, {"AEL0", SimMethodId::AEL0},
      {"BELb", SimMethodId::BELb}, {"AELb", SimMethodId::AELb},
  };
  auto it = table.find(name);
  if (it == table.end()) throw InputError("unknown method name: " + name);
  return it->second;
}

std::string method_name(SimMethodId id) {
  switch (id) {
    case SimMethodId::T2: return "T2";
    case SimMethodId::F: return "F";
    case SimMethodId::EL: return "EL";
    case SimMethodId::BEL: return "BEL";
    case SimMethodId::AEL: return "AEL";
    case SimMethodId::BELs: return "BEL*";
    case SimMethodId::AELs: return "AEL*";
    case SimMethodId::BELt: return "BELt";
    case SimMethodId::AELt: return "AELt";
    case SimMethodId::AEL0: return "AEL0";
    case SimMethodId::BELb: return "BELb";
    case SimMethodId::AELb: return "AELb";
  }
  return "?";
}

CoverageReport coverage_experiment(const SimConfig& config) {
  validate_common(config);
  if (config.levels.empty()) throw InputError("no levels configured");
  if (config.methods.empty()) throw InputError("no methods configured");

  CoverageReport report;
  report.master_seed = config.master_seed;

  const size_t n_methods = config.methods.size();
  const size_t n_levels = config.levels.size();

  for (const auto& cell : config.cells) {
    const bool need_truth =
        std::any_of(config.methods.begin(), config.methods.end(), [](SimMethodId m) {
          return m == SimMethodId::BELt || m == SimMethodId::AELt;
        });
    const CellContext ctx = make_context(config, cell, need_truth);
    for (SimMethodId m : config.methods)
      if (!method_allowed(ctx.family, m))
        throw InputError("method " + method_name(m) +
                         " is not defined for population " + ctx.pop->id);

    std::vector<double> chi2_cutoffs(n_levels);
    const int df = (ctx.family == Family::Asset) ? ctx.gee->p() : ctx.gee->q();
    for (size_t l = 0; l < n_levels; ++l)
      chi2_cutoffs[l] = chi2_quantile(config.levels[l], df);

    const int reps = config.replications;
    std::vector<RepTally> tallies(reps);
    run_in_chunks(reps, config.threads, [&](int rep) {
      RepTally& tally = tallies[rep];
      tally.covers.assign(n_methods * n_levels, 0);
      tally.infeasible.assign(n_methods, 0);
      tally.failed.assign(n_methods, 0);
      const Matrix sample = draw_sample(ctx, config, rep);
      if (ctx.family == Family::Asset) {
        const std::uint64_t boot_seed = Rng::derive_seed(
            config.master_seed,
            {kTagBootstrap, static_cast<std::uint64_t>(ctx.pop_index),
             static_cast<std::uint64_t>(ctx.n), static_cast<std::uint64_t>(rep)});
        asset_rep(ctx, config, chi2_cutoffs, sample, boot_seed, tally);
      } else {
        just_identified_rep(ctx, config, chi2_cutoffs, sample, tally);
      }
    });

    for (size_t mi = 0; mi < n_methods; ++mi) {
      int failures = 0;
      int infeasible = 0;
      for (int rep = 0; rep < reps; ++rep) {
        failures += tallies[rep].failed[mi];
        infeasible += tallies[rep].infeasible[mi];
      }
      const int used = reps - failures;
      if (failures > reps / 10)
        throw ReliabilityError("cell aborted: more than 10% solver failures",
                               used, reps);
      for (size_t l = 0; l < n_levels; ++l) {
        int hits = 0;
        for (int rep = 0; rep < reps; ++rep)
          if (!tallies[rep].failed[mi]) hits += tallies[rep].covers[mi * n_levels + l];
        CoverageRow row;
        row.method = method_name(config.methods[mi]);
        row.level = config.levels[l];
        row.n = cell.n;
        row.population = ctx.pop->id;
        row.replications = used;
        row.coverage = (used > 0) ? static_cast<double>(hits) / used : 0.0;
        row.mc_se = (used > 0)
                        ? std::sqrt(row.coverage * (1.0 - row.coverage) / used)
                        : 0.0;
        row.infeasible = infeasible;
        row.failures = failures;
        row.master_seed = config.master_seed;
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

BartlettBiasReport bartlett_bias_experiment(const SimConfig& config) {
  validate_common(config);
  if (config.replications < 1000)
    throw InputError("factor-bias experiments need at least 1000 replications");

  BartlettBiasReport report;
  for (const auto& cell : config.cells) {
    const CellContext ctx = make_context(config, cell, true);
    if (ctx.family == Family::Asset)
      throw InputError("factor-bias experiment is not defined for the asset model");

    const int reps = config.replications;
    constexpr double kFailed = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> naive(reps, kFailed), reduced(reps, kFailed);

    run_in_chunks(reps, config.threads, [&](int rep) {
      try {
        const Matrix sample = draw_sample(ctx, config, rep);
        const Vector theta_hat = *ctx.gee->closed_form_estimate(sample);
        const Matrix g_hat = (*ctx.gee)(sample, theta_hat);
        if (g_hat.cols() == 1) {
          naive[rep] = naive_moment_univariate(g_hat.col(0)).b;
          reduced[rep] = bias_reduced_univariate(g_hat.col(0)).b;
        } else {
          const Standardization st = standardize(g_hat);
          naive[rep] = naive_moment_multivariate(st.transformed).b;
          reduced[rep] = bias_reduced_multivariate(st.transformed).b;
        }
      } catch (const Error&) {
        // leave NaN sentinels: counted as a failure below
      }
    });

    BartlettBiasRow row;
    row.population = ctx.pop->id;
    row.n = cell.n;
    row.b_true = ctx.truth->b;
    row.simulated_truth = std::holds_alternative<LatentDPop>(ctx.pop->spec);
    row.master_seed = config.master_seed;
    double sum_naive = 0.0, sum_reduced = 0.0;
    int used = 0;
    for (int rep = 0; rep < reps; ++rep) {
      if (std::isnan(naive[rep]) || std::isnan(reduced[rep])) continue;
      sum_naive += naive[rep];
      sum_reduced += reduced[rep];
      ++used;
    }
    row.failures = reps - used;
    row.replications = used;
    if (row.failures > reps / 10)
      throw ReliabilityError("cell aborted: more than 10% failures", used, reps);
    row.mean_naive = sum_naive / used;
    row.mean_reduced = sum_reduced / used;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace ael
