#include "ess/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ess/block_cv.hpp"
#include "ess/rng.hpp"
#include "ess/stats.hpp"

namespace ess {

namespace {

constexpr std::uint64_t kTagData = 0x64617461ULL;
constexpr std::uint64_t kTagOracle = 0x6f7261ULL;

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

bool consecutive_from_one(const TrainingGrid& grid) {
  for (std::size_t k = 0; k < grid.sizes.size(); ++k)
    if (grid.sizes[k] != static_cast<Index>(k) + 1) return false;
  return true;
}

struct SeqCounters {
  Index duality = 0;
  Index identity = 0;
  Index errors = 0;
  Index exhausted = 0;
};

/// Bookkeeping checks applied to every sequential run in the suite: the
/// reject/lower-bound duality, and on unit-step grids the representation of
/// the stop as the first size whose lower bound drops to zero.
void tally(const SequentialResult& seq, bool unit_grid, SeqCounters& c) {
  if (!duality_holds(seq.steps)) ++c.duality;
  if (seq.error) {
    ++c.errors;
    return;
  }
  if (seq.exhausted) ++c.exhausted;
  if (unit_grid) {
    Index expect = -1;
    for (const StepResult& s : seq.steps)
      if (s.lb <= 0.0) {
        expect = s.train_size;
        break;
      }
    if (expect < 0) expect = seq.steps.back().train_size + 1;
    if (seq.n_hat != expect) ++c.identity;
  }
}

void merge_counters(const SeqCounters& c, std::map<std::string, double>& details) {
  details["duality_violations"] = static_cast<double>(c.duality);
  details["grid_identity_violations"] = static_cast<double>(c.identity);
  details["run_errors"] = static_cast<double>(c.errors);
  details["exhausted_runs"] = static_cast<double>(c.exhausted);
}

}  // namespace

const char* dgp_name(DgpKind kind) {
  switch (kind) {
    case DgpKind::LinearGaussian: return "linear_gaussian";
    case DgpKind::Logistic: return "logistic";
    case DgpKind::PureNoise: return "pure_noise";
    case DgpKind::Rct: return "rct";
  }
  return "unknown";
}

Index DgpSpec::n_covariates() const {
  switch (kind) {
    case DgpKind::LinearGaussian:
    case DgpKind::Logistic: return beta.size() > 0 ? beta.size() : 1;
    case DgpKind::PureNoise:
    case DgpKind::Rct: return 1;
  }
  return 1;
}

std::string DgpSpec::describe() const {
  std::ostringstream os;
  os << "kind=" << dgp_name(kind) << ",p=" << n_covariates() << ",noise_sd=" << noise_sd;
  switch (kind) {
    case DgpKind::LinearGaussian:
    case DgpKind::Logistic:
      os << ",intercept=" << intercept << ",rule_bias=" << rule_bias;
      if (kind == DgpKind::Logistic) os << ",flip_width=" << flip_width;
      break;
    case DgpKind::PureNoise: os << ",level=" << intercept << ",rule_bias=" << rule_bias; break;
    case DgpKind::Rct:
      os << ",pi=" << propensity << ",base_slope=" << base_slope << ",cate_slope=" << cate_slope
         << ",cate_rule_bias=" << cate_rule_bias;
      break;
  }
  return os.str();
}

Dataset draw_dataset(const DgpSpec& dgp, Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidInputError("cannot draw an empty dataset");
  Rng rng(derive_seed(seed, kTagData));
  Dataset data;
  const Index p = dgp.n_covariates();

  switch (dgp.kind) {
    case DgpKind::LinearGaussian: {
      Eigen::MatrixXd X(n, p);
      Eigen::VectorXd y(n), rule(n);
      for (Index i = 0; i < n; ++i) {
        double signal = dgp.intercept;
        for (Index j = 0; j < p; ++j) {
          X(i, j) = rng.normal();
          signal += (dgp.beta.size() > j ? dgp.beta(j) : 0.0) * X(i, j);
        }
        y(i) = signal + dgp.noise_sd * rng.normal();
        rule(i) = signal + dgp.rule_bias;
      }
      for (Index j = 0; j < p; ++j)
        data.add_numeric("x" + std::to_string(j + 1), ColumnRole::CovariateNumeric, X.col(j));
      data.add_numeric("y", ColumnRole::Outcome, y);
      data.add_numeric("rule", ColumnRole::FixedRulePrediction, rule);
      break;
    }
    case DgpKind::PureNoise: {
      Eigen::VectorXd x(n), y(n), rule(n);
      for (Index i = 0; i < n; ++i) {
        x(i) = rng.normal();
        y(i) = dgp.intercept + dgp.noise_sd * rng.normal();
        rule(i) = dgp.intercept + dgp.rule_bias;
      }
      data.add_numeric("x1", ColumnRole::CovariateNumeric, x);
      data.add_numeric("y", ColumnRole::Outcome, y);
      data.add_numeric("rule", ColumnRole::FixedRulePrediction, rule);
      break;
    }
    case DgpKind::Logistic: {
      Eigen::MatrixXd X(n, p);
      std::vector<std::string> y(static_cast<std::size_t>(n)),
          rule(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        double eta = dgp.intercept;
        for (Index j = 0; j < p; ++j) {
          X(i, j) = rng.normal();
          eta += (dgp.beta.size() > j ? dgp.beta(j) : 0.0) * X(i, j);
        }
        const double prob = 1.0 / (1.0 + std::exp(-eta));
        const bool one = rng.uniform() < prob;
        y[static_cast<std::size_t>(i)] = one ? "1" : "0";
        bool bayes = eta >= 0.0;
        if (std::abs(X(i, 0)) < dgp.flip_width) bayes = !bayes;
        rule[static_cast<std::size_t>(i)] = bayes ? "1" : "0";
      }
      for (Index j = 0; j < p; ++j)
        data.add_numeric("x" + std::to_string(j + 1), ColumnRole::CovariateNumeric, X.col(j));
      data.add_categorical("y", ColumnRole::Outcome, y);
      data.add_categorical("rule", ColumnRole::FixedRulePrediction, rule);
      break;
    }
    case DgpKind::Rct: {
      Eigen::VectorXd x(n), t(n), pi(n), y(n), g(n), f0(n), f1(n);
      for (Index i = 0; i < n; ++i) {
        x(i) = rng.normal();
        t(i) = rng.bernoulli(dgp.propensity) ? 1.0 : 0.0;
        const double m0 = dgp.base_slope * x(i);
        const double tau = dgp.cate_slope * x(i);
        y(i) = m0 + t(i) * tau + dgp.noise_sd * rng.normal();
        pi(i) = dgp.propensity;
        g(i) = tau + dgp.cate_rule_bias;
        f0(i) = m0 + dgp.arm_rule_bias0;
        f1(i) = m0 + tau + dgp.arm_rule_bias1;
      }
      data.add_numeric("x1", ColumnRole::CovariateNumeric, x);
      data.add_numeric("y", ColumnRole::Outcome, y);
      data.add_numeric("t", ColumnRole::Treatment, t);
      data.add_numeric("pi", ColumnRole::Propensity, pi);
      data.add_numeric("g", ColumnRole::FixedRulePrediction, g);
      data.add_numeric("f0", ColumnRole::ArmPrediction0, f0);
      data.add_numeric("f1", ColumnRole::ArmPrediction1, f1);
      break;
    }
  }
  data.validate();
  return data;
}

double dgp_outcome_variance(const DgpSpec& dgp) {
  switch (dgp.kind) {
    case DgpKind::LinearGaussian:
      return dgp.beta.squaredNorm() + dgp.noise_sd * dgp.noise_sd;
    case DgpKind::PureNoise: return dgp.noise_sd * dgp.noise_sd;
    case DgpKind::Rct: {
      const double a = dgp.base_slope, c = dgp.cate_slope, pi = dgp.propensity;
      return pi * (a + c) * (a + c) + (1.0 - pi) * a * a + dgp.noise_sd * dgp.noise_sd;
    }
    case DgpKind::Logistic:
      throw InvalidInputError("no closed-form outcome variance for the logistic generator");
  }
  return 0.0;
}

double dgp_rule_risk(const DgpSpec& dgp) {
  switch (dgp.kind) {
    case DgpKind::LinearGaussian:
    case DgpKind::PureNoise:
      return dgp.noise_sd * dgp.noise_sd + dgp.rule_bias * dgp.rule_bias;
    case DgpKind::Rct: return rct_rule_risk(dgp);
    case DgpKind::Logistic:
      throw InvalidInputError("no closed-form rule risk for the logistic generator");
  }
  return 0.0;
}

double mean_learner_risk(const DgpSpec& dgp, Index train_size) {
  return dgp_outcome_variance(dgp) * (1.0 + 1.0 / static_cast<double>(train_size));
}

double pure_noise_mean_sigma2(const DgpSpec& dgp, Index train_size) {
  if (dgp.kind != DgpKind::PureNoise)
    throw InvalidInputError("closed-form CV variance is derived for pure noise only");
  const double s2 = dgp.noise_sd * dgp.noise_sd;
  return 2.0 * s2 * s2 * (1.0 + 3.0 / static_cast<double>(train_size));
}

double rct_second_moment(const DgpSpec& dgp) {
  const double a = dgp.base_slope, c = dgp.cate_slope, pi = dgp.propensity;
  const double s2 = dgp.noise_sd * dgp.noise_sd;
  return ((a + c) * (a + c) + s2) / pi + (a * a + s2) / (1.0 - pi);
}

double rct_rule_risk(const DgpSpec& dgp) {
  const double c = dgp.cate_slope, b = dgp.cate_rule_bias;
  return rct_second_moment(dgp) - c * c + b * b;
}

double rct_mean_learner_risk(const DgpSpec& dgp, Index train_size) {
  return rct_second_moment(dgp) * (1.0 + 1.0 / static_cast<double>(train_size));
}

double rct_arm_outcome_variance(const DgpSpec& dgp, int arm) {
  const double slope = dgp.base_slope + (arm == 1 ? dgp.cate_slope : 0.0);
  return slope * slope + dgp.noise_sd * dgp.noise_sd;
}

double rct_arm_rule_risk(const DgpSpec& dgp, int arm) {
  const double b = arm == 1 ? dgp.arm_rule_bias1 : dgp.arm_rule_bias0;
  return dgp.noise_sd * dgp.noise_sd + b * b;
}

Index crossing_size(const std::function<double(Index)>& risk_at, double rule_risk, Index n_max) {
  for (Index N = 1; N <= n_max; ++N)
    if (risk_at(N) <= rule_risk) return N;
  return -1;
}

LearnerSpec plain_learner(LearnerFamily family) {
  LearnerSpec spec;
  spec.family = family;
  spec.preprocess.winsorize_quantiles.reset();
  spec.preprocess.log_outcome = false;
  return spec;
}

OracleEstimate oracle_risk(const DgpSpec& dgp, const LearnerSpec& learner_spec, Index train_size,
                           Index reps, Index test_rows, std::uint64_t seed) {
  if (reps < 100) throw InvalidInputError("oracle risk needs at least 100 replications");
  if (train_size < 1 || test_rows < 1) throw InvalidInputError("bad oracle sizes");
  const auto learner = make_learner(learner_spec);
  const LossFunction loss =
      dgp.kind == DgpKind::Logistic ? LossFunction::zero_one() : LossFunction::squared();

  std::vector<Index> train_rows(static_cast<std::size_t>(train_size));
  for (Index i = 0; i < train_size; ++i) train_rows[static_cast<std::size_t>(i)] = i;
  std::vector<Index> eval_rows(static_cast<std::size_t>(test_rows));
  for (Index i = 0; i < test_rows; ++i) eval_rows[static_cast<std::size_t>(i)] = train_size + i;

  Eigen::VectorXd rep_means(reps), preds(test_rows);
  for (Index rep = 0; rep < reps; ++rep) {
    const std::uint64_t s = derive_seed(seed, kTagOracle, static_cast<std::uint64_t>(rep));
    // one joint draw keeps the label vocabulary shared between the training
    // block and the evaluation rows
    const Dataset data = draw_dataset(dgp, train_size + test_rows, s);
    const Hyperparams hp = learner->tune(data.subset(train_rows), train_size, derive_seed(s, 1));
    const auto rule = learner->train(data, train_rows, hp, derive_seed(s, 2));
    rule->predict_rows(data, eval_rows, preds);
    double acc = 0.0;
    for (Index i = 0; i < test_rows; ++i)
      acc += loss(data.outcome_values()(eval_rows[static_cast<std::size_t>(i)]), preds(i));
    rep_means(rep) = acc / static_cast<double>(test_rows);
  }
  OracleEstimate est;
  est.reps = reps;
  est.value = mean_ordered(rep_means);
  est.mc_se = std::sqrt(sample_variance(rep_means) / static_cast<double>(reps));
  return est;
}

ExperimentReport clt_experiment(const CltConfig& cfg) {
  if (dgp_outcome_variance(cfg.dgp) == 0.0)
    throw InvalidInputError("zero-variance generator: the studentized limit does not apply");
  const double e_n = mean_learner_risk(cfg.dgp, cfg.train_size);
  const auto learner = make_learner(plain_learner(LearnerFamily::BaselineMean));
  const LossFunction loss = LossFunction::squared();
  const double z = normal_quantile(1.0 - (1.0 - cfg.level) / 2.0);

  std::vector<double> tstats;
  tstats.reserve(static_cast<std::size_t>(cfg.reps));
  Index covered = 0, degenerate = 0;
  double sigma2_sum = 0.0;
  for (Index rep = 0; rep < cfg.reps; ++rep) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    const Dataset data = draw_dataset(cfg.dgp, cfg.n, s);
    CvOptions opts;
    opts.seed = s;
    const CvRun run = run_block_cv(data, *learner, cfg.train_size, loss, opts, false);
    const VarianceEstimate var = variance_for_regime(run.learner_cv, cfg.regime);
    sigma2_sum += var.sigma2;
    if (var.sigma2 == 0.0) {
      ++degenerate;
      continue;
    }
    const double se =
        std::sqrt(var.sigma2 / static_cast<double>(run.learner_cv.n_effective()));
    const double t = (run.learner_cv.e_cv - e_n) / se;
    tstats.push_back(t);
    if (std::abs(t) <= z) ++covered;
  }
  const auto used = static_cast<Index>(tstats.size());
  if (used == 0) throw NumericError("every replication had degenerate variance");

  ExperimentReport rep;
  rep.name = "clt";
  rep.config = cfg.dgp.describe() + ",n=" + std::to_string(cfg.n) +
               ",N=" + std::to_string(cfg.train_size) + ",reps=" + std::to_string(cfg.reps) +
               ",regime=" + regime_name(cfg.regime) + ",seed=" + std::to_string(cfg.seed);
  rep.replications = used;
  rep.estimate = static_cast<double>(covered) / static_cast<double>(used);
  rep.mc_se = proportion_mc_se(cfg.level, used);
  rep.tolerance = 3.0 * rep.mc_se;
  rep.pass = std::abs(rep.estimate - cfg.level) <= rep.tolerance;
  Eigen::Map<const Eigen::VectorXd> tv(tstats.data(), used);
  rep.details["ks_distance"] = ks_distance_normal(tstats);
  rep.details["mean_t"] = mean_ordered(tv);
  rep.details["var_t"] = sample_variance(tv);
  rep.details["degenerate"] = static_cast<double>(degenerate);
  rep.details["oracle_risk"] = e_n;
  rep.details["mean_sigma2"] = sigma2_sum / static_cast<double>(cfg.reps);
  return rep;
}

ExperimentReport variance_consistency_experiment(const VarianceConsistencyConfig& cfg) {
  if (cfg.ns.empty() || cfg.ns.size() != cfg.reps.size())
    throw InvalidInputError("one replication count per sample size required");
  const auto learner = make_learner(plain_learner(LearnerFamily::BaselineMean));
  const LossFunction loss = LossFunction::squared();
  const double e_n = mean_learner_risk(cfg.dgp, cfg.train_size);

  std::vector<double> rel_err(cfg.ns.size()), rel_se(cfg.ns.size());
  ExperimentReport rep;
  for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
    const Index n = cfg.ns[i];
    const Index R = cfg.reps[i];
    double sigma2_sum = 0.0;
    Eigen::VectorXd scaled_sq(R);
    for (Index r = 0; r < R; ++r) {
      const std::uint64_t s =
          derive_seed(cfg.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r));
      const Dataset data = draw_dataset(cfg.dgp, n, s);
      CvOptions opts;
      opts.seed = s;
      const CvRun run = run_block_cv(data, *learner, cfg.train_size, loss, opts, false);
      sigma2_sum += variance_fixed_n(run.learner_cv).sigma2;
      const double dev = run.learner_cv.e_cv - e_n;
      scaled_sq(r) = static_cast<double>(run.learner_cv.n_effective()) * dev * dev;
    }
    const double mean_sigma2 = sigma2_sum / static_cast<double>(R);
    const double sigma2_mc = mean_ordered(scaled_sq);
    rel_err[i] = std::abs(mean_sigma2 / sigma2_mc - 1.0);
    rel_se[i] =
        std::sqrt(sample_variance(scaled_sq) / static_cast<double>(R)) / sigma2_mc;
    const std::string tag = std::to_string(n);
    rep.details["sigma2_hat_" + tag] = mean_sigma2;
    rep.details["sigma2_mc_" + tag] = sigma2_mc;
    rep.details["rel_err_" + tag] = rel_err[i];
    rep.details["rel_se_" + tag] = rel_se[i];
  }
  if (cfg.dgp.kind == DgpKind::PureNoise)
    rep.details["sigma2_closed_form"] = pure_noise_mean_sigma2(cfg.dgp, cfg.train_size);

  bool decreasing = true;
  for (std::size_t i = 1; i < rel_err.size(); ++i)
    if (rel_err[i] >= rel_err[i - 1]) decreasing = false;
  rep.name = "variance_consistency";
  rep.config = cfg.dgp.describe() + ",N=" + std::to_string(cfg.train_size) +
               ",seed=" + std::to_string(cfg.seed);
  rep.replications = cfg.reps.back();
  rep.estimate = rel_err.back();
  rep.mc_se = rel_se.back();
  rep.tolerance = cfg.tolerance;
  rep.pass = rel_err.back() <= cfg.tolerance && decreasing;
  rep.details["decreasing"] = decreasing ? 1.0 : 0.0;
  return rep;
}

namespace {

ExperimentReport run_coverage(const CoverageConfig& cfg, const TrainingGrid& grid,
                              const std::string& name, std::vector<Index>* n_hats) {
  if (cfg.oracle_n_star <= 0)
    throw InvalidInputError("coverage experiment needs the oracle crossing size");
  const auto learner = make_learner(cfg.learner);
  const LossFunction loss = LossFunction::squared();
  const bool unit_grid = consecutive_from_one(grid);

  SeqCounters counters;
  Index covered = 0;
  for (Index r = 0; r < cfg.reps; ++r) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const Dataset data = draw_dataset(cfg.dgp, cfg.n, s);
    StepOptions opts;
    opts.alpha = cfg.alpha;
    opts.seed = s;
    const SequentialResult seq = sequential_ess(data, *learner, grid, loss, opts, false);
    tally(seq, unit_grid, counters);
    const bool cov = !seq.error && seq.n_hat <= cfg.oracle_n_star;
    if (cov) ++covered;
    if (n_hats) n_hats->push_back(seq.error ? -1 : seq.n_hat);
  }
  ExperimentReport rep;
  rep.name = name;
  rep.config = cfg.dgp.describe() + ",learner=" + family_name(cfg.learner.family) +
               ",n=" + std::to_string(cfg.n) + ",alpha=" + format_g(cfg.alpha) +
               ",n_star=" + std::to_string(cfg.oracle_n_star) +
               ",seed=" + std::to_string(cfg.seed);
  rep.replications = cfg.reps;
  rep.estimate = static_cast<double>(covered) / static_cast<double>(cfg.reps);
  rep.mc_se = proportion_mc_se(rep.estimate, cfg.reps);
  rep.tolerance = 3.0 * proportion_mc_se(1.0 - cfg.alpha, cfg.reps);
  rep.pass = rep.estimate >= 1.0 - cfg.alpha - rep.tolerance;
  merge_counters(counters, rep.details);
  return rep;
}

}  // namespace

ExperimentReport coverage_experiment(const CoverageConfig& cfg) {
  return run_coverage(cfg, cfg.grid, "coverage", nullptr);
}

PairedCoverageReport paired_coverage_experiment(const CoverageConfig& cfg,
                                                const TrainingGrid& coarse) {
  for (const Index s : coarse.sizes)
    if (std::find(cfg.grid.sizes.begin(), cfg.grid.sizes.end(), s) == cfg.grid.sizes.end())
      throw InvalidInputError("coarse grid must be a sub-grid of the fine grid");
  PairedCoverageReport out;
  std::vector<Index> fine_hats, coarse_hats;
  out.fine = run_coverage(cfg, cfg.grid, "coverage_fine", &fine_hats);
  out.coarse = run_coverage(cfg, coarse, "coverage_coarse", &coarse_hats);
  for (std::size_t r = 0; r < fine_hats.size(); ++r)
    if (fine_hats[r] >= 0 && coarse_hats[r] >= 0 && coarse_hats[r] > fine_hats[r])
      ++out.coarse_exceeds_fine;
  out.coarse.details["coarse_exceeds_fine"] = static_cast<double>(out.coarse_exceeds_fine);
  out.coarse.pass = out.coarse.pass && out.coarse_exceeds_fine == 0;
  return out;
}

ExperimentReport fwer_experiment(const FwerConfig& cfg) {
  if (cfg.true_n_star <= 0) throw InvalidInputError("FWER experiment needs the true crossing");
  const auto learner = make_learner(cfg.learner);
  const LossFunction loss = LossFunction::squared();
  const bool unit_grid = consecutive_from_one(cfg.grid);

  SeqCounters counters;
  Index false_stops = 0;
  for (Index r = 0; r < cfg.reps; ++r) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const Dataset data = draw_dataset(cfg.dgp, cfg.n, s);
    StepOptions opts;
    opts.alpha = cfg.alpha;
    opts.seed = s;
    const SequentialResult seq = sequential_ess(data, *learner, cfg.grid, loss, opts, false);
    tally(seq, unit_grid, counters);
    if (!seq.error && seq.n_hat > cfg.true_n_star) ++false_stops;
  }
  ExperimentReport rep;
  rep.name = "fwer";
  rep.config = cfg.dgp.describe() + ",n=" + std::to_string(cfg.n) +
               ",alpha=" + format_g(cfg.alpha) +
               ",n_star=" + std::to_string(cfg.true_n_star) +
               ",seed=" + std::to_string(cfg.seed);
  rep.replications = cfg.reps;
  rep.estimate = static_cast<double>(false_stops) / static_cast<double>(cfg.reps);
  rep.mc_se = proportion_mc_se(std::max(rep.estimate, 1e-12), cfg.reps);
  rep.tolerance = cfg.alpha + 3.0 * proportion_mc_se(cfg.alpha, cfg.reps);
  rep.pass = rep.estimate <= rep.tolerance;
  merge_counters(counters, rep.details);
  return rep;
}

ExperimentReport cate_coverage_experiment(const CateCoverageConfig& cfg) {
  if (cfg.dgp.kind != DgpKind::Rct)
    throw InvalidInputError("CATE coverage needs the RCT generator");
  if (cfg.oracle_n_star <= 0)
    throw InvalidInputError("coverage experiment needs the oracle crossing size");
  const auto learner = make_learner(cfg.learner);
  const LossFunction loss = LossFunction::squared();
  const OverlapOptions overlap;
  const bool unit_grid = consecutive_from_one(cfg.grid);

  SeqCounters counters;
  Index covered = 0;
  for (Index r = 0; r < cfg.reps; ++r) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const Dataset data = draw_dataset(cfg.dgp, cfg.n, s);
    StepOptions opts;
    opts.alpha = cfg.alpha;
    opts.seed = s;
    const SequentialResult seq =
        cate_ess(data, *learner, cfg.grid, loss, opts, overlap, false);
    tally(seq, unit_grid, counters);
    if (!seq.error && seq.n_hat <= cfg.oracle_n_star) ++covered;
  }
  ExperimentReport rep;
  rep.name = "cate_coverage";
  rep.config = cfg.dgp.describe() + ",n=" + std::to_string(cfg.n) +
               ",alpha=" + format_g(cfg.alpha) +
               ",n_star=" + std::to_string(cfg.oracle_n_star) +
               ",seed=" + std::to_string(cfg.seed);
  rep.replications = cfg.reps;
  rep.estimate = static_cast<double>(covered) / static_cast<double>(cfg.reps);
  rep.mc_se = proportion_mc_se(rep.estimate, cfg.reps);
  rep.tolerance = 3.0 * proportion_mc_se(1.0 - cfg.alpha, cfg.reps);
  rep.pass = rep.estimate >= 1.0 - cfg.alpha - rep.tolerance;
  merge_counters(counters, rep.details);
  return rep;
}

}  // namespace ess
