#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ess/cate.hpp"
#include "ess/dataset.hpp"
#include "ess/inference.hpp"

namespace ess {

enum class DgpKind { LinearGaussian, Logistic, PureNoise, Rct };

const char* dgp_name(DgpKind kind);

/// Synthetic data generators with closed-form risks where possible. The
/// fixed rule is the truth shifted by a deterministic bias so its risk is
/// exact. RCT draws additionally carry treatment, propensity, a CATE rule
/// g(x) = tau(x) + cate_rule_bias, and per-arm rules m_t(x) + arm_rule_bias.
struct DgpSpec {
  DgpKind kind = DgpKind::PureNoise;
  Eigen::VectorXd beta;
  double intercept = 0.0;
  double noise_sd = 1.0;
  double rule_bias = 0.0;
  double flip_width = 0.0;  // logistic rule: Bayes label flipped when |x1| < flip_width
  double propensity = 0.5;
  double base_slope = 1.0;
  double cate_slope = 2.0;
  double cate_rule_bias = 0.0;
  double arm_rule_bias0 = 0.0;
  double arm_rule_bias1 = 0.0;

  Index n_covariates() const;
  std::string describe() const;
};

Dataset draw_dataset(const DgpSpec& dgp, Index n, std::uint64_t seed);

double dgp_outcome_variance(const DgpSpec& dgp);
double dgp_rule_risk(const DgpSpec& dgp);
/// Risk of the train-set-mean predictor at training size N: Var(Y)(1 + 1/N).
double mean_learner_risk(const DgpSpec& dgp, Index train_size);
/// Asymptotic variance of the CV risk of the mean predictor under pure
/// Gaussian noise: 2 sigma^4 (1 + 3/N).
double pure_noise_mean_sigma2(const DgpSpec& dgp, Index train_size);

double rct_second_moment(const DgpSpec& dgp);  // E[Ytilde^2]
double rct_rule_risk(const DgpSpec& dgp);      // risk of g against Ytilde
double rct_mean_learner_risk(const DgpSpec& dgp, Index train_size);
double rct_arm_outcome_variance(const DgpSpec& dgp, int arm);
double rct_arm_rule_risk(const DgpSpec& dgp, int arm);

/// Smallest N in 1..n_max with risk_at(N) <= rule_risk, or -1.
Index crossing_size(const std::function<double(Index)>& risk_at, double rule_risk, Index n_max);

/// Learner spec with raw outcomes (no winsorizing, no log transform) so that
/// closed-form risks stay valid.
LearnerSpec plain_learner(LearnerFamily family);

struct OracleEstimate {
  double value = 0.0;
  double mc_se = 0.0;
  Index reps = 0;
};

/// Monte Carlo estimate of e_N: fresh size-N training draws, each fitted rule
/// scored on an independent test draw.
OracleEstimate oracle_risk(const DgpSpec& dgp, const LearnerSpec& learner, Index train_size,
                           Index reps, Index test_rows, std::uint64_t seed);

struct ExperimentReport {
  std::string name;
  std::string config;
  Index replications = 0;
  double estimate = 0.0;
  double mc_se = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::map<std::string, double> details;
};

struct CltConfig {
  DgpSpec dgp;
  Index n = 3000;
  Index train_size = 3;
  Index reps = 2000;
  double level = 0.95;
  VarianceRegime regime = VarianceRegime::FixedN;
  std::uint64_t seed = 1;
};

/// Coverage of two-sided nominal-level intervals for e_N built from the
/// studentized CV risk of the mean learner, plus the Kolmogorov distance of
/// the studentized sample from the standard normal. Refuses zero-variance
/// generators.
ExperimentReport clt_experiment(const CltConfig& config);

struct VarianceConsistencyConfig {
  DgpSpec dgp;
  Index train_size = 100;
  std::vector<Index> ns{1000, 4000, 16000};
  std::vector<Index> reps{100000, 30000, 8000};
  double tolerance = 0.10;
  std::uint64_t seed = 1;
};

/// Mean plug-in variance against the Monte Carlo variance of the scaled CV
/// risk at each n; passes when the relative error at the largest n is within
/// tolerance and the errors decrease along the n ladder.
ExperimentReport variance_consistency_experiment(const VarianceConsistencyConfig& config);

struct CoverageConfig {
  DgpSpec dgp;
  LearnerSpec learner = plain_learner(LearnerFamily::BaselineMean);
  TrainingGrid grid;
  Index n = 3000;
  Index reps = 1000;
  double alpha = 0.05;
  Index oracle_n_star = 0;
  std::uint64_t seed = 1;
};

ExperimentReport coverage_experiment(const CoverageConfig& config);

struct PairedCoverageReport {
  ExperimentReport fine;
  ExperimentReport coarse;
  Index coarse_exceeds_fine = 0;
};

/// Runs the same replications through a fine grid and a coarse sub-grid with
/// identical CV seeds, tracking per-replication violations of the
/// coarse <= fine stopping bound.
PairedCoverageReport paired_coverage_experiment(const CoverageConfig& config,
                                                const TrainingGrid& coarse);

struct FwerConfig {
  DgpSpec dgp;
  LearnerSpec learner = plain_learner(LearnerFamily::BaselineMean);
  TrainingGrid grid;
  Index n = 2000;
  Index reps = 1000;
  double alpha = 0.05;
  Index true_n_star = 0;
  std::uint64_t seed = 1;
};

/// Probability of rejecting any true null along the sequence, i.e. of
/// stopping beyond the true crossing.
ExperimentReport fwer_experiment(const FwerConfig& config);

struct CateCoverageConfig {
  DgpSpec dgp;
  LearnerSpec learner = plain_learner(LearnerFamily::BaselineMean);
  TrainingGrid grid;
  Index n = 3000;
  Index reps = 500;
  double alpha = 0.05;
  Index oracle_n_star = 0;
  std::uint64_t seed = 1;
};

ExperimentReport cate_coverage_experiment(const CateCoverageConfig& config);

}  // namespace ess
