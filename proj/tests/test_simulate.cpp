#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "ess/simulate.hpp"
#include "ess/stats.hpp"

using namespace ess;

namespace {

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

DgpSpec linear_dgp(double rule_bias) {
  DgpSpec dgp;
  dgp.kind = DgpKind::LinearGaussian;
  dgp.beta = Eigen::Vector2d(1.0, 0.5);
  dgp.noise_sd = 1.0;
  dgp.rule_bias = rule_bias;
  return dgp;
}

DgpSpec noise_dgp(double rule_bias) {
  DgpSpec dgp;
  dgp.kind = DgpKind::PureNoise;
  dgp.rule_bias = rule_bias;
  return dgp;
}

DgpSpec trial_dgp() {
  DgpSpec dgp;
  dgp.kind = DgpKind::Rct;
  dgp.base_slope = 1.0;
  dgp.cate_slope = 2.0;
  dgp.noise_sd = 0.5;
  dgp.propensity = 0.5;
  dgp.cate_rule_bias = 2.7;
  return dgp;
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("closed-form risks match hand arithmetic") {
  const DgpSpec lg = linear_dgp(std::sqrt(1.9));
  CHECK(dgp_outcome_variance(lg) == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(dgp_rule_risk(lg) == doctest::Approx(2.9).epsilon(1e-12));
  CHECK(mean_learner_risk(lg, 4) == doctest::Approx(2.8125).epsilon(1e-12));

  DgpSpec pn = noise_dgp(0.5);
  pn.noise_sd = 2.0;
  CHECK(dgp_outcome_variance(pn) == doctest::Approx(4.0));
  CHECK(dgp_rule_risk(pn) == doctest::Approx(4.25));
  const DgpSpec unit = noise_dgp(0.0);
  CHECK(pure_noise_mean_sigma2(unit, 3) == doctest::Approx(4.0));
  CHECK(pure_noise_mean_sigma2(unit, 1) == doctest::Approx(8.0));
  CHECK_THROWS_AS((void)pure_noise_mean_sigma2(lg, 3), InvalidInputError);

  DgpSpec logit;
  logit.kind = DgpKind::Logistic;
  logit.beta = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS((void)dgp_outcome_variance(logit), InvalidInputError);
  CHECK_THROWS_AS((void)dgp_rule_risk(logit), InvalidInputError);

  const DgpSpec rct = trial_dgp();
  CHECK(dgp_outcome_variance(rct) == doctest::Approx(5.25).epsilon(1e-12));
  CHECK(rct_second_moment(rct) == doctest::Approx(21.0).epsilon(1e-12));
  CHECK(rct_rule_risk(rct) == doctest::Approx(24.29).epsilon(1e-12));
  CHECK(dgp_rule_risk(rct) == doctest::Approx(24.29).epsilon(1e-12));
  CHECK(rct_mean_learner_risk(rct, 7) == doctest::Approx(24.0).epsilon(1e-12));
  CHECK(rct_arm_outcome_variance(rct, 0) == doctest::Approx(1.25));
  CHECK(rct_arm_outcome_variance(rct, 1) == doctest::Approx(9.25));
  DgpSpec arms = rct;
  arms.arm_rule_bias0 = 0.3;
  arms.arm_rule_bias1 = 0.4;
  CHECK(rct_arm_rule_risk(arms, 0) == doctest::Approx(0.34));
  CHECK(rct_arm_rule_risk(arms, 1) == doctest::Approx(0.41));

  CHECK(std::string(dgp_name(DgpKind::PureNoise)) == "pure_noise");
  CHECK(lg.n_covariates() == 2);
  CHECK(noise_dgp(0.0).n_covariates() == 1);
  CHECK(rct.n_covariates() == 1);
  CHECK(contains(lg.describe(), "kind=linear_gaussian"));
  CHECK(contains(lg.describe(), "p=2"));
  CHECK(contains(rct.describe(), "cate_rule_bias=2.7"));
}

TEST_CASE("crossing sizes follow the closed-form risk curves") {
  const DgpSpec lg = linear_dgp(std::sqrt(1.9));
  const auto lg_risk = [&](Index N) { return mean_learner_risk(lg, N); };
  CHECK(crossing_size(lg_risk, dgp_rule_risk(lg), 50) == 4);

  const DgpSpec pn = noise_dgp(std::sqrt(1.0 / 3.0));
  const auto pn_risk = [&](Index N) { return mean_learner_risk(pn, N); };
  CHECK(crossing_size(pn_risk, dgp_rule_risk(pn), 50) == 3);

  const DgpSpec rct = trial_dgp();
  const auto rct_risk = [&](Index N) { return rct_mean_learner_risk(rct, N); };
  CHECK(crossing_size(rct_risk, rct_rule_risk(rct), 64) == 7);

  const DgpSpec flat = linear_dgp(0.0);
  const auto flat_risk = [&](Index N) { return mean_learner_risk(flat, N); };
  CHECK(crossing_size(flat_risk, dgp_rule_risk(flat), 50) == -1);
  CHECK(crossing_size(flat_risk, 99.0, 50) == 1);
}

TEST_CASE("dataset draws are seeded, shaped and typed") {
  const DgpSpec lg = linear_dgp(0.7);
  const Dataset a = draw_dataset(lg, 50, 7);
  CHECK(a.n_rows() == 50);
  CHECK(a.n_columns() == 4);
  CHECK(a.column(0).name == "x1");
  CHECK(a.column(1).name == "x2");
  CHECK(a.outcome_kind() == OutcomeKind::Numeric);
  const Dataset b = draw_dataset(lg, 50, 7);
  CHECK((a.outcome_values().array() == b.outcome_values().array()).all());
  CHECK((a.column(0).values.array() == b.column(0).values.array()).all());
  const Dataset c = draw_dataset(lg, 50, 8);
  CHECK_FALSE((a.outcome_values().array() == c.outcome_values().array()).all());
  // the rule column is the conditional mean shifted by the bias
  const auto& rule = a.role_column(ColumnRole::FixedRulePrediction).values;
  for (Index i = 0; i < 5; ++i) {
    const double signal = a.column(0).values(i) + 0.5 * a.column(1).values(i);
    CHECK(rule(i) == doctest::Approx(signal + 0.7).epsilon(1e-12));
  }

  const Dataset trial = draw_dataset(trial_dgp(), 40, 3);
  CHECK(trial.n_columns() == 7);
  CHECK(trial.has_role(ColumnRole::Treatment));
  CHECK(trial.has_role(ColumnRole::Propensity));
  CHECK(trial.has_role(ColumnRole::ArmPrediction0));
  CHECK((trial.role_column(ColumnRole::Propensity).values.array() == 0.5).all());
  const auto& x = trial.column(0).values;
  const auto& g = trial.role_column(ColumnRole::FixedRulePrediction).values;
  const auto& f0 = trial.role_column(ColumnRole::ArmPrediction0).values;
  const auto& f1 = trial.role_column(ColumnRole::ArmPrediction1).values;
  for (Index i = 0; i < 5; ++i) {
    CHECK(g(i) == doctest::Approx(2.0 * x(i) + 2.7).epsilon(1e-12));
    CHECK(f1(i) - f0(i) == doctest::Approx(2.0 * x(i)).epsilon(1e-12));
  }

  DgpSpec logit;
  logit.kind = DgpKind::Logistic;
  logit.beta = Eigen::VectorXd::Ones(1);
  logit.flip_width = 0.3;
  const Dataset lab = draw_dataset(logit, 60, 5);
  CHECK(lab.outcome_kind() == OutcomeKind::Categorical);
  const auto& lx = lab.column(0).values;
  const auto& lrule = lab.role_column(ColumnRole::FixedRulePrediction).values;
  for (Index i = 0; i < 60; ++i) {
    bool bayes = lx(i) >= 0.0;
    if (std::abs(lx(i)) < 0.3) bayes = !bayes;
    CHECK(lab.label_text(lrule(i)) == (bayes ? "1" : "0"));
  }

  CHECK_THROWS_AS((void)draw_dataset(lg, 0, 1), InvalidInputError);
}

TEST_CASE("drawn moments match the generator's closed forms") {
  DgpSpec pn = noise_dgp(1.0);
  pn.intercept = 3.0;
  pn.noise_sd = 2.0;
  const Dataset data = draw_dataset(pn, 20000, 11);
  const auto& y = data.outcome_values();
  const auto& rule = data.role_column(ColumnRole::FixedRulePrediction).values;
  CHECK(mean_ordered(y) == doctest::Approx(3.0).epsilon(0.02));
  const Eigen::VectorXd sq = (y - rule).array().square();
  // E[(Y - rule)^2] = sigma^2 + bias^2 = 5
  const double se = std::sqrt(sample_variance(sq) / 20000.0);
  CHECK(std::abs(mean_ordered(sq) - dgp_rule_risk(pn)) <= 3.0 * se);
}

TEST_CASE("oracle risk reproduces closed-form learner risks") {
  const DgpSpec pn = noise_dgp(0.0);
  const LearnerSpec mean_spec = plain_learner(LearnerFamily::BaselineMean);
  const OracleEstimate est = oracle_risk(pn, mean_spec, 4, 2000, 200, 11);
  CHECK(est.reps == 2000);
  CHECK(est.mc_se > 0.0);
  CHECK(est.mc_se < 0.02);
  CHECK(std::abs(est.value - 1.25) <= 3.0 * est.mc_se);

  for (const Index N : {2, 8}) {
    const OracleEstimate e = oracle_risk(pn, mean_spec, N, 1500, 150, 13 + N);
    CHECK(std::abs(e.value - mean_learner_risk(pn, N)) <= 3.0 * e.mc_se);
  }
}

TEST_CASE("oracle risk is zero when the learner reproduces a constant truth") {
  DgpSpec flat = noise_dgp(0.0);
  flat.noise_sd = 0.0;
  const OracleEstimate est =
      oracle_risk(flat, plain_learner(LearnerFamily::BaselineMean), 3, 200, 50, 1);
  CHECK(est.value == 0.0);
  CHECK(est.mc_se == 0.0);
}

TEST_CASE("oracle risk curve is nonincreasing for the lasso") {
  const DgpSpec lg = linear_dgp(0.0);
  const LearnerSpec lasso = plain_learner(LearnerFamily::Lasso);
  std::vector<OracleEstimate> curve;
  for (const Index N : {2, 4, 8, 16})
    curve.push_back(oracle_risk(lg, lasso, N, 400, 150, 17));
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double slack =
        3.0 * std::sqrt(curve[i - 1].mc_se * curve[i - 1].mc_se + curve[i].mc_se * curve[i].mc_se);
    CHECK(curve[i].value <= curve[i - 1].value + slack);
  }
  // with ample data the lasso approaches the irreducible noise floor
  CHECK(curve.back().value < 1.5);
  CHECK(curve.front().value > curve.back().value);
}

TEST_CASE("oracle risk rejects undersized requests") {
  const DgpSpec pn = noise_dgp(0.0);
  const LearnerSpec spec = plain_learner(LearnerFamily::BaselineMean);
  CHECK_THROWS_AS((void)oracle_risk(pn, spec, 3, 99, 50, 1), InvalidInputError);
  CHECK_THROWS_AS((void)oracle_risk(pn, spec, 0, 200, 50, 1), InvalidInputError);
  CHECK_THROWS_AS((void)oracle_risk(pn, spec, 3, 200, 0, 1), InvalidInputError);
}

TEST_CASE("clt experiment covers the oracle risk and reproduces bit for bit") {
  CltConfig cfg;
  cfg.dgp = noise_dgp(0.0);
  cfg.n = 800;
  cfg.train_size = 3;
  cfg.reps = 400;
  cfg.seed = 21;
  const ExperimentReport rep = clt_experiment(cfg);
  CHECK(rep.name == "clt");
  CHECK(contains(rep.config, "seed=21"));
  CHECK(rep.replications == 400);
  CHECK(rep.details.at("degenerate") == 0.0);
  CHECK(rep.pass);
  CHECK(rep.estimate == doctest::Approx(0.95).epsilon(0.04));
  CHECK(rep.details.at("ks_distance") > 0.0);
  CHECK(rep.details.at("ks_distance") < 0.2);
  CHECK(std::abs(rep.details.at("mean_t")) < 0.25);
  CHECK(rep.details.at("var_t") == doctest::Approx(1.0).epsilon(0.35));
  CHECK(rep.details.at("oracle_risk") == doctest::Approx(1.0 + 1.0 / 3.0).epsilon(1e-12));
  CHECK(rep.details.at("mean_sigma2") == doctest::Approx(4.0).epsilon(0.2));

  const ExperimentReport again = clt_experiment(cfg);
  CHECK(again.estimate == rep.estimate);
  CHECK(again.details == rep.details);
  CHECK(again.config == rep.config);

  CltConfig other = cfg;
  other.seed = 22;
  CHECK(clt_experiment(other).details.at("mean_t") != rep.details.at("mean_t"));
}

TEST_CASE("clt experiment also holds in the fixed block count regime") {
  CltConfig cfg;
  cfg.dgp = noise_dgp(0.0);
  cfg.n = 1200;
  cfg.train_size = 300;
  cfg.regime = VarianceRegime::FixedB;
  cfg.reps = 400;
  cfg.seed = 31;
  const ExperimentReport rep = clt_experiment(cfg);
  CHECK(contains(rep.config, "regime=fixed_b"));
  CHECK(rep.pass);
  CHECK(rep.estimate > 0.9);
}

TEST_CASE("clt experiment refuses zero-variance generators") {
  CltConfig cfg;
  cfg.dgp = noise_dgp(0.0);
  cfg.dgp.noise_sd = 0.0;
  CHECK_THROWS_WITH_AS((void)clt_experiment(cfg),
                       "zero-variance generator: the studentized limit does not apply",
                       InvalidInputError);
}

TEST_CASE("monte carlo errors shrink as the square root of the replications") {
  CltConfig cfg;
  cfg.dgp = noise_dgp(0.0);
  cfg.n = 300;
  cfg.train_size = 3;
  cfg.seed = 33;
  std::vector<double> ses;
  for (const Index reps : {250, 1000, 4000}) {
    cfg.reps = reps;
    const ExperimentReport rep = clt_experiment(cfg);
    CHECK(rep.replications == reps);
    ses.push_back(rep.mc_se);
  }
  CHECK(ses[0] / ses[1] == doctest::Approx(2.0).epsilon(0.01));
  CHECK(ses[1] / ses[2] == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("variance consistency ladder reports per-size diagnostics") {
  VarianceConsistencyConfig cfg;
  cfg.dgp = noise_dgp(0.0);
  cfg.train_size = 5;
  cfg.ns = {400, 1200};
  cfg.reps = {1500, 600};
  cfg.seed = 3;
  const ExperimentReport rep = variance_consistency_experiment(cfg);
  CHECK(rep.name == "variance_consistency");
  CHECK(rep.replications == 600);
  CHECK(rep.tolerance == 0.10);
  CHECK(rep.estimate == rep.details.at("rel_err_1200"));
  CHECK(rep.details.at("sigma2_closed_form") == doctest::Approx(3.2).epsilon(1e-12));
  CHECK(rep.details.at("sigma2_hat_1200") == doctest::Approx(3.2).epsilon(0.05));
  CHECK(rep.details.at("sigma2_mc_1200") == doctest::Approx(3.2).epsilon(0.2));
  CHECK(rep.details.at("rel_err_400") < 0.2);
  CHECK(rep.details.at("rel_err_1200") < 0.2);
  CHECK(rep.details.at("rel_se_1200") > 0.0);
  const double dec = rep.details.at("decreasing");
  CHECK((dec == 0.0 || dec == 1.0));

  const ExperimentReport again = variance_consistency_experiment(cfg);
  CHECK(again.estimate == rep.estimate);
  CHECK(again.details == rep.details);

  VarianceConsistencyConfig bad = cfg;
  bad.reps = {100};
  CHECK_THROWS_WITH_AS((void)variance_consistency_experiment(bad),
                       "one replication count per sample size required", InvalidInputError);
}

TEST_CASE("unbeatable fixed rules are covered by construction") {
  CoverageConfig cfg;
  cfg.dgp = linear_dgp(0.0);
  cfg.dgp.beta = Eigen::VectorXd::Ones(1);
  cfg.grid = TrainingGrid::explicit_sizes({1, 2, 4});
  cfg.n = 300;
  cfg.reps = 60;
  cfg.oracle_n_star = 1000;
  cfg.seed = 37;
  const ExperimentReport rep = coverage_experiment(cfg);
  CHECK(rep.name == "coverage");
  CHECK(rep.estimate == 1.0);
  CHECK(rep.pass);
  CHECK(rep.details.at("run_errors") == 0.0);
  CHECK(rep.details.at("duality_violations") == 0.0);
  CHECK(rep.details.at("exhausted_runs") == 60.0);
}

TEST_CASE("sequential coverage holds at a fifty percent level") {
  CoverageConfig cfg;
  cfg.dgp = linear_dgp(std::sqrt(1.9));
  cfg.grid = TrainingGrid::explicit_sizes({1, 2, 3, 4, 5, 6});
  cfg.n = 600;
  cfg.reps = 200;
  cfg.alpha = 0.5;
  cfg.seed = 41;
  const auto risk = [&](Index N) { return mean_learner_risk(cfg.dgp, N); };
  cfg.oracle_n_star = crossing_size(risk, dgp_rule_risk(cfg.dgp), 50);
  CHECK(cfg.oracle_n_star == 4);
  const ExperimentReport rep = coverage_experiment(cfg);
  CHECK(contains(rep.config, "alpha=0.5"));
  CHECK(rep.pass);
  CHECK(rep.details.at("grid_identity_violations") == 0.0);
  CHECK(rep.details.at("duality_violations") == 0.0);

  const ExperimentReport again = coverage_experiment(cfg);
  CHECK(again.estimate == rep.estimate);
  CHECK(again.details == rep.details);

  CoverageConfig bad = cfg;
  bad.oracle_n_star = 0;
  CHECK_THROWS_AS((void)coverage_experiment(bad), InvalidInputError);
}

TEST_CASE("paired runs never stop later on the coarse sub-grid") {
  CoverageConfig cfg;
  cfg.dgp = linear_dgp(std::sqrt(1.9));
  cfg.grid = TrainingGrid::explicit_sizes({1, 2, 3, 4, 5, 6, 7, 8});
  cfg.n = 500;
  cfg.reps = 120;
  cfg.seed = 43;
  const auto risk = [&](Index N) { return mean_learner_risk(cfg.dgp, N); };
  cfg.oracle_n_star = crossing_size(risk, dgp_rule_risk(cfg.dgp), 50);
  const TrainingGrid coarse = TrainingGrid::explicit_sizes({1, 2, 4, 8});
  const PairedCoverageReport paired = paired_coverage_experiment(cfg, coarse);
  CHECK(paired.fine.name == "coverage_fine");
  CHECK(paired.coarse.name == "coverage_coarse");
  CHECK(paired.coarse_exceeds_fine == 0);
  CHECK(paired.coarse.details.at("coarse_exceeds_fine") == 0.0);
  CHECK(paired.fine.pass);
  CHECK(paired.coarse.pass);

  const TrainingGrid off = TrainingGrid::explicit_sizes({1, 12});
  CHECK_THROWS_WITH_AS((void)paired_coverage_experiment(cfg, off),
                       "coarse grid must be a sub-grid of the fine grid", InvalidInputError);
}

TEST_CASE("familywise error vanishes when every null is false") {
  FwerConfig cfg;
  cfg.dgp = noise_dgp(0.0);
  cfg.grid = TrainingGrid::explicit_sizes({1, 2, 3});
  cfg.n = 300;
  cfg.reps = 80;
  cfg.true_n_star = 999;
  cfg.seed = 47;
  const ExperimentReport rep = fwer_experiment(cfg);
  CHECK(rep.name == "fwer");
  CHECK(rep.estimate == 0.0);
  CHECK(rep.pass);
  CHECK(rep.details.at("grid_identity_violations") == 0.0);
  CHECK(rep.details.at("run_errors") == 0.0);
}

TEST_CASE("familywise error stays near the test size at an immediate crossing") {
  FwerConfig cfg;
  cfg.dgp = noise_dgp(1.0);
  cfg.grid = TrainingGrid::explicit_sizes({1, 2, 3, 4});
  cfg.n = 600;
  cfg.reps = 300;
  cfg.seed = 51;
  const auto risk = [&](Index N) { return mean_learner_risk(cfg.dgp, N); };
  cfg.true_n_star = crossing_size(risk, dgp_rule_risk(cfg.dgp), 50);
  CHECK(cfg.true_n_star == 1);
  const ExperimentReport rep = fwer_experiment(cfg);
  CHECK(rep.pass);
  CHECK(rep.estimate <= rep.tolerance);
  CHECK(rep.details.at("duality_violations") == 0.0);
  CHECK(rep.details.at("grid_identity_violations") == 0.0);

  FwerConfig bad = cfg;
  bad.true_n_star = 0;
  CHECK_THROWS_AS((void)fwer_experiment(bad), InvalidInputError);
}

TEST_CASE("cate coverage certifies the transformed-outcome bound") {
  CateCoverageConfig cfg;
  cfg.dgp = trial_dgp();
  cfg.grid = TrainingGrid::explicit_sizes({1, 2, 4, 8, 16, 32});
  cfg.n = 1200;
  cfg.reps = 120;
  cfg.seed = 61;
  const auto risk = [&](Index N) { return rct_mean_learner_risk(cfg.dgp, N); };
  cfg.oracle_n_star = crossing_size(risk, rct_rule_risk(cfg.dgp), 64);
  CHECK(cfg.oracle_n_star == 7);
  const ExperimentReport rep = cate_coverage_experiment(cfg);
  CHECK(rep.name == "cate_coverage");
  CHECK(rep.pass);
  CHECK(rep.details.at("run_errors") == 0.0);
  CHECK(rep.details.at("duality_violations") == 0.0);

  CateCoverageConfig wrong = cfg;
  wrong.dgp = noise_dgp(0.0);
  CHECK_THROWS_WITH_AS((void)cate_coverage_experiment(wrong),
                       "CATE coverage needs the RCT generator", InvalidInputError);
  CateCoverageConfig unset = cfg;
  unset.oracle_n_star = 0;
  CHECK_THROWS_AS((void)cate_coverage_experiment(unset), InvalidInputError);
}

}  // TEST_SUITE
