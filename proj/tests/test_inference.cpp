#include <doctest.h>

#include <cmath>
#include <vector>

#include "ess/inference.hpp"
#include "ess/rng.hpp"
#include "ess/simulate.hpp"
#include "ess/stats.hpp"

using namespace ess;

namespace {

std::unique_ptr<Learner> mean_learner() {
  return make_learner(plain_learner(LearnerFamily::BaselineMean));
}

Dataset four_point_data() {
  Eigen::VectorXd y(4);
  y << 0, 2, 4, 6;
  Dataset data;
  data.add_numeric("y", ColumnRole::Outcome, y);
  data.add_numeric("rule", ColumnRole::FixedRulePrediction, y);
  data.validate();
  return data;
}

StepResult synthetic_step(Index train_size, double e_cv, double e_rule, double risk_se) {
  StepResult s;
  s.train_size = train_size;
  s.e_cv = e_cv;
  s.e_rule = e_rule;
  s.risk_se = risk_se;
  const double diff = e_cv - e_rule;
  s.lb = diff;
  s.rejected = diff > 0.0;
  return s;
}

SequentialResult run_sequential(const DgpSpec& dgp, Index n, std::vector<Index> sizes,
                                std::uint64_t seed, bool curve_mode) {
  const Dataset data = draw_dataset(dgp, n, seed);
  const auto learner = mean_learner();
  StepOptions opts;
  opts.seed = derive_seed(seed, 1);
  return sequential_ess(data, *learner, TrainingGrid::explicit_sizes(std::move(sizes)),
                        LossFunction::squared(), opts, curve_mode);
}

}  // namespace

TEST_CASE("studentized decision arithmetic") {
  const double z = normal_quantile(0.95);
  {
    // diff 2 with a unit standard error
    const Decision d = studentized_decision(2.0, 4.0, 4, 0.05);
    CHECK(d.t_stat == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.lb == doctest::Approx(2.0 - z).epsilon(1e-12));
    CHECK(d.rejected);
    CHECK_FALSE(d.degenerate_variance);
  }
  {
    const Decision d = studentized_decision(0.0, 4.0, 4, 0.05);
    CHECK_EQ(d.t_stat, 0.0);
    CHECK(d.lb < 0.0);
    CHECK_FALSE(d.rejected);
    CHECK_FALSE(studentized_decision(0.0, 4.0, 4, 0.4).rejected);
  }
  {
    const Decision d = studentized_decision(5.0, 0.0, 10, 0.05);
    CHECK(d.degenerate_variance);
    CHECK(std::isinf(d.t_stat));
    CHECK_EQ(d.lb, 5.0);
    CHECK(d.rejected);
    CHECK_FALSE(studentized_decision(-5.0, 0.0, 10, 0.05).rejected);
    CHECK_FALSE(studentized_decision(0.0, 0.0, 10, 0.05).rejected);
  }
  CHECK_THROWS_AS(studentized_decision(1.0, -1.0, 4, 0.05), InvalidInputError);
  CHECK_THROWS_AS(studentized_decision(1.0, 1.0, 0, 0.05), InvalidInputError);
}

TEST_CASE("test step on the four-point instance") {
  // N=1 makes every statistic invariant to the seeded permutation: blocks are
  // singletons and all moments are symmetric in the rows, so the values below
  // are exact for any seed
  const Dataset data = four_point_data();
  const auto learner = mean_learner();
  StepOptions opts;
  opts.seed = 123;
  const StepResult step = test_step(data, *learner, 1, LossFunction::squared(), opts);
  CHECK_EQ(step.blocks, 4);
  CHECK_EQ(step.n_effective, 4);
  CHECK_EQ(step.regime, VarianceRegime::FixedN);
  CHECK(step.e_cv == doctest::Approx(40.0 / 3.0).epsilon(1e-13));
  CHECK_EQ(step.e_rule, 0.0);
  CHECK(step.diff == doctest::Approx(40.0 / 3.0).epsilon(1e-13));
  // V_train = V_test = 1024/27 and, with singleton blocks, m_hat equals
  // mu_hat so C = 1024/27 as well: sigma2 = (1 + 1 + 2) * 1024/27
  const double sigma2 = 4096.0 / 27.0;
  const double se = std::sqrt(sigma2 / 4.0);
  CHECK(step.variance.sigma2 == doctest::Approx(sigma2).epsilon(1e-12));
  CHECK(step.se == doctest::Approx(se).epsilon(1e-12));
  CHECK(step.t_stat == doctest::Approx((40.0 / 3.0) / se).epsilon(1e-12));
  const double z = normal_quantile(0.95);
  CHECK(step.lb == doctest::Approx(40.0 / 3.0 - z * se).epsilon(1e-12));
  CHECK(step.rejected);
  CHECK_FALSE(step.degenerate_variance);
  CHECK_FALSE(step.variance_clipped);
  // rule losses vanish, so the difference losses equal the learner losses
  CHECK_EQ(step.learner_variance.sigma2, step.variance.sigma2);

  StepOptions bad = opts;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(test_step(data, *learner, 1, LossFunction::squared(), bad), InvalidInputError);
  bad.alpha = 1.0;
  CHECK_THROWS_AS(test_step(data, *learner, 1, LossFunction::squared(), bad), InvalidInputError);
}

TEST_CASE("learner identical to the rule is never rejected") {
  Dataset data;
  data.add_numeric("y", ColumnRole::Outcome, Eigen::VectorXd::Constant(8, 4.0));
  data.add_numeric("rule", ColumnRole::FixedRulePrediction, Eigen::VectorXd::Constant(8, 4.0));
  data.validate();
  const auto learner = mean_learner();
  const StepResult step = test_step(data, *learner, 2, LossFunction::squared(), StepOptions{});
  CHECK(step.degenerate_variance);
  CHECK_FALSE(step.rejected);
  CHECK_EQ(step.diff, 0.0);
  CHECK_EQ(step.t_stat, 0.0);
}

TEST_CASE("failure at the first size stops at one") {
  DgpSpec dgp;
  dgp.kind = DgpKind::PureNoise;
  dgp.rule_bias = std::sqrt(10.0);  // rule far worse than a mean fit at any size
  const SequentialResult seq = run_sequential(dgp, 100, {1, 2, 4}, 7, false);
  REQUIRE_FALSE(seq.error.has_value());
  CHECK_EQ(seq.stop_index, 0);
  CHECK_EQ(seq.n_hat, 1);
  CHECK_FALSE(seq.exhausted);
  CHECK_EQ(seq.steps.size(), 1);

  const SequentialResult curve = run_sequential(dgp, 100, {1, 2, 4}, 7, true);
  CHECK_EQ(curve.steps.size(), 3);
  CHECK_EQ(curve.stop_index, 0);
  CHECK_EQ(curve.n_hat, 1);
}

TEST_CASE("exhausted grids report one past the largest size") {
  DgpSpec dgp;
  dgp.kind = DgpKind::LinearGaussian;
  dgp.beta = Eigen::VectorXd::Constant(1, 1.0);  // rule equals the truth
  const SequentialResult seq = run_sequential(dgp, 400, {1, 2, 4}, 11, false);
  REQUIRE_FALSE(seq.error.has_value());
  CHECK_EQ(seq.steps.size(), 3);
  for (const StepResult& s : seq.steps) CHECK(s.rejected);
  CHECK(seq.exhausted);
  CHECK_EQ(seq.stop_index, -1);
  CHECK_EQ(seq.n_hat, 5);

  const SequentialResult curve = run_sequential(dgp, 400, {1, 2, 4}, 11, true);
  CHECK(curve.exhausted);
  CHECK_EQ(curve.n_hat, 5);
}

TEST_CASE("first failure mid-grid yields previous size plus one") {
  {
    DgpSpec dgp;
    dgp.kind = DgpKind::PureNoise;
    dgp.rule_bias = std::sqrt(0.3);  // risk 1.3 sits between e_1 = 2 and e_50 = 1.02
    const SequentialResult seq = run_sequential(dgp, 2000, {1, 50}, 3, false);
    REQUIRE_FALSE(seq.error.has_value());
    REQUIRE_EQ(seq.steps.size(), 2);
    CHECK(seq.steps[0].rejected);
    CHECK_FALSE(seq.steps[1].rejected);
    CHECK_EQ(seq.stop_index, 1);
    CHECK_EQ(seq.n_hat, 2);
  }
  {
    DgpSpec dgp;
    dgp.kind = DgpKind::PureNoise;
    dgp.rule_bias = std::sqrt(0.05);  // risk 1.05 between e_10 = 1.1 and e_50 = 1.02
    const SequentialResult seq = run_sequential(dgp, 20000, {10, 50}, 5, false);
    REQUIRE_FALSE(seq.error.has_value());
    REQUIRE_EQ(seq.steps.size(), 2);
    CHECK(seq.steps[0].rejected);
    CHECK_FALSE(seq.steps[1].rejected);
    CHECK_EQ(seq.n_hat, 11);
  }
}

TEST_CASE("stopping rule matches the lower-bound curve on unit grids") {
  DgpSpec dgp;
  dgp.kind = DgpKind::LinearGaussian;
  dgp.beta = (Eigen::VectorXd(2) << 1.0, 0.5).finished();
  dgp.rule_bias = std::sqrt(1.9);
  const std::vector<Index> unit{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const SequentialResult curve = run_sequential(dgp, 240, unit, seed, true);
    REQUIRE_FALSE(curve.error.has_value());
    REQUIRE_EQ(curve.steps.size(), unit.size());
    CHECK(duality_holds(curve.steps));
    Index expected = unit.back() + 1;
    for (const StepResult& s : curve.steps) {
      if (!s.rejected) {
        expected = s.train_size;  // consecutive grid: N_{k-1}+1 == N_k, and 1 at k=0
        break;
      }
    }
    CHECK_EQ(curve.n_hat, expected);
    CHECK_EQ(curve.exhausted, expected == unit.back() + 1);
  }
}

TEST_CASE("coarse grids never exceed the fine-grid estimate") {
  DgpSpec dgp;
  dgp.kind = DgpKind::LinearGaussian;
  dgp.beta = (Eigen::VectorXd(2) << 1.0, 0.5).finished();
  dgp.rule_bias = std::sqrt(1.9);
  const std::vector<Index> fine{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const std::vector<Index> coarse{1, 2, 4, 8, 12};
  for (std::uint64_t seed = 40; seed < 48; ++seed) {
    const SequentialResult f = run_sequential(dgp, 240, fine, seed, false);
    const SequentialResult c = run_sequential(dgp, 240, coarse, seed, false);
    REQUIRE_FALSE(f.error.has_value());
    REQUIRE_FALSE(c.error.has_value());
    CHECK(c.n_hat <= f.n_hat);
  }
}

TEST_CASE("plugin estimator finds the first crossing") {
  std::vector<StepResult> steps{synthetic_step(10, 0.5, 0.4, 0.01),
                                synthetic_step(50, 0.3, 0.4, 0.01)};
  CHECK_EQ(plugin_ess(steps), 50);
  CHECK_EQ(plugin_ess({synthetic_step(10, 0.5, 0.6, 0.01)}), 10);
  CHECK_EQ(plugin_ess({synthetic_step(10, 0.5, 0.4, 0.01),
                       synthetic_step(50, 0.45, 0.4, 0.01)}),
           -1);
  CHECK_EQ(plugin_ess({synthetic_step(10, 0.4, 0.4, 0.01)}), 10);  // ties cross
}

TEST_CASE("monotonicity diagnostics flag adjacent increases") {
  {
    const std::vector<StepResult> steps{synthetic_step(10, 0.5, 0, 0.01),
                                        synthetic_step(20, 0.4, 0, 0.01),
                                        synthetic_step(40, 0.3, 0, 0.01)};
    const MonotonicityReport rep = check_monotonicity(steps);
    CHECK(rep.increases.empty());
    CHECK(rep.monotone_within_noise);
  }
  {
    const std::vector<StepResult> steps{synthetic_step(10, 0.30, 0, 0.01),
                                        synthetic_step(20, 0.35, 0, 0.01)};
    const MonotonicityReport rep = check_monotonicity(steps);
    REQUIRE_EQ(rep.increases.size(), 1);
    CHECK_EQ(rep.increases[0].from, 10);
    CHECK_EQ(rep.increases[0].to, 20);
    CHECK(rep.increases[0].delta == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(rep.increases[0].combined_se ==
          doctest::Approx(0.01 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK_FALSE(rep.increases[0].within_noise);  // 0.05 >= 2 * 0.0141
    CHECK_FALSE(rep.monotone_within_noise);
  }
  {
    // same rise but noisy estimates: flagged yet within noise
    const std::vector<StepResult> steps{synthetic_step(10, 0.30, 0, 0.03),
                                        synthetic_step(20, 0.35, 0, 0.03)};
    const MonotonicityReport rep = check_monotonicity(steps);
    REQUIRE_EQ(rep.increases.size(), 1);
    CHECK(rep.increases[0].within_noise);
    CHECK(rep.monotone_within_noise);
  }
}

TEST_CASE("duality checker") {
  std::vector<StepResult> steps{synthetic_step(10, 0.5, 0.4, 0.01)};
  CHECK(duality_holds(steps));
  steps[0].rejected = !steps[0].rejected;
  CHECK_FALSE(duality_holds(steps));
}

TEST_CASE("nested-truth bookkeeping on constructed curves") {
  // mean-learner-shaped population curve: risk(N) = 1 + 1/N
  const auto risk_at = [](Index n) { return 1.0 + 1.0 / static_cast<double>(n); };
  const std::vector<Index> grid{1, 2, 5, 10, 20, 40};
  for (const double excess : {0.03, 0.06, 0.11, 0.26, 0.6}) {
    const double e_rule = 1.0 + excess;
    const Index n_star = crossing_size(risk_at, e_rule, 1000);
    REQUIRE(n_star > 0);
    Index k_star = -1;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (risk_at(grid[k]) <= e_rule) {
        k_star = static_cast<Index>(k);
        break;
      }
    }
    if (k_star < 0) continue;  // curve crosses beyond this grid
    const Index lower = k_star == 0 ? 1 : grid[static_cast<std::size_t>(k_star - 1)] + 1;
    CHECK(lower <= n_star);
    CHECK(n_star <= grid[static_cast<std::size_t>(k_star)]);
  }
}

TEST_CASE("grid construction and validation") {
  {
    const TrainingGrid g = TrainingGrid::geometric(1, 64, 7);
    const std::vector<Index> want{1, 2, 4, 8, 16, 32, 64};
    CHECK_EQ(g.sizes, want);
  }
  {
    const TrainingGrid g = TrainingGrid::geometric(1, 100, 2);
    const std::vector<Index> want{1, 100};
    CHECK_EQ(g.sizes, want);
  }
  CHECK_EQ(TrainingGrid::geometric(3, 3, 5).sizes, std::vector<Index>{3});
  CHECK_THROWS_AS(TrainingGrid::geometric(0, 10, 3), InvalidInputError);
  CHECK_THROWS_AS(TrainingGrid::geometric(10, 5, 3), InvalidInputError);

  {
    const TrainingGrid g = TrainingGrid::parse("1,2,4");
    const std::vector<Index> want{1, 2, 4};
    CHECK_EQ(g.sizes, want);
    g.validate(8);
    CHECK_THROWS_AS(g.validate(7), InvalidInputError);  // 4 > 7/2
  }
  CHECK_THROWS_AS(TrainingGrid::parse("abc").validate(100), InvalidInputError);
  CHECK_THROWS_AS(TrainingGrid::parse("2.5"), InvalidInputError);
  CHECK_THROWS_AS(TrainingGrid::parse("5,3").validate(100), InvalidInputError);
  CHECK_THROWS_AS(TrainingGrid::explicit_sizes({}).validate(100), InvalidInputError);
  CHECK_THROWS_AS(TrainingGrid::explicit_sizes({0, 2}).validate(100), InvalidInputError);
  CHECK_THROWS_AS(TrainingGrid::explicit_sizes({2, 2}).validate(100), InvalidInputError);
}

TEST_CASE("grid failures preserve partial results") {
  // zero-one loss on a numeric outcome fails inside the first step
  Eigen::VectorXd y(8);
  y << 1, 2, 3, 4, 5, 6, 7, 8;
  Dataset data;
  data.add_numeric("y", ColumnRole::Outcome, y);
  data.add_numeric("rule", ColumnRole::FixedRulePrediction, y);
  data.validate();
  const auto learner = mean_learner();
  const SequentialResult seq =
      sequential_ess(data, *learner, TrainingGrid::explicit_sizes({2, 4}),
                     LossFunction::zero_one(), StepOptions{}, false);
  REQUIRE(seq.error.has_value());
  CHECK(seq.steps.empty());
  CHECK_EQ(seq.n_hat, -1);
  CHECK_FALSE(seq.exhausted);
}
