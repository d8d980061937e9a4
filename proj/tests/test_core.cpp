#include <doctest.h>

#include <cmath>

#include "ess/loss.hpp"
#include "ess/rng.hpp"
#include "ess/stats.hpp"

using namespace ess;

TEST_CASE("pointwise losses") {
  const LossFunction sq = LossFunction::squared();
  const LossFunction zo = LossFunction::zero_one();

  CHECK_EQ(sq(6.0, 1.0), 25.0);
  CHECK_EQ(sq(1.0, 6.0), 25.0);
  CHECK_EQ(zo(0.0, 0.0), 0.0);  // "own" vs "own" as interned codes
  CHECK_EQ(zo(1.0, 5.0), 1.0);  // own/rent coding mismatch counts as an error

  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double y = rng.normal() * 10;
    const double p = rng.normal() * 10;
    CHECK(sq(y, p) >= 0.0);
    CHECK_EQ(sq(y, y), 0.0);
    CHECK_EQ(zo(y, y), 0.0);
  }
}

TEST_CASE("typed loss evaluation rejects mismatches") {
  const OutcomeValue num{2.0, false};
  const OutcomeValue lab{1.0, true};
  CHECK_EQ(evaluate_loss(LossFunction::squared(), num, OutcomeValue{5.0, false}), 9.0);
  CHECK_EQ(evaluate_loss(LossFunction::zero_one(), lab, OutcomeValue{1.0, true}), 0.0);
  CHECK_THROWS_AS(evaluate_loss(LossFunction::squared(), lab, lab), InvalidInputError);
  CHECK_THROWS_AS(evaluate_loss(LossFunction::zero_one(), num, num), InvalidInputError);
  CHECK_THROWS_AS(evaluate_loss(LossFunction::squared(), num, lab), InvalidInputError);
}

TEST_CASE("accuracy complements mean zero-one loss") {
  Rng rng(11);
  const LossFunction zo = LossFunction::zero_one();
  std::vector<int> y(60), p(60);
  for (int i = 0; i < 60; ++i) {
    y[i] = rng.bernoulli(0.4) ? 1 : 0;
    p[i] = rng.bernoulli(0.6) ? 1 : 0;
  }
  double loss = 0.0;
  for (int i = 0; i < 60; ++i) loss += zo(y[i], p[i]);
  loss /= 60.0;
  const MetricsResult m = aggregate_metrics(y, p);
  CHECK(m.accuracy == doctest::Approx(1.0 - loss).epsilon(1e-12));
}

TEST_CASE("confusion-matrix aggregates") {
  {
    const std::vector<int> y{1, 1, 0, 0}, p{1, 1, 0, 0};
    const MetricsResult m = aggregate_metrics(y, p);
    CHECK_EQ(m.accuracy, 1.0);
    CHECK_EQ(*m.balanced_accuracy, 1.0);
    CHECK_EQ(*m.f1, 1.0);
    CHECK_FALSE(m.balanced_accuracy_degenerate);
  }
  {
    const std::vector<int> y{1, 0, 1, 0}, p{1, 1, 1, 1};
    const MetricsResult m = aggregate_metrics(y, p);
    CHECK_EQ(m.accuracy, 0.5);
    CHECK_EQ(*m.balanced_accuracy, 0.5);
    CHECK(*m.f1 == doctest::Approx(2.0 / 3.0));
  }
  {
    // no negatives in truth: recall for class 0 is undefined
    const std::vector<int> y{1, 1, 1, 1}, p{0, 0, 0, 0};
    const MetricsResult m = aggregate_metrics(y, p);
    CHECK_EQ(m.accuracy, 0.0);
    CHECK(m.balanced_accuracy_degenerate);
    CHECK_FALSE(m.balanced_accuracy.has_value());
    CHECK_EQ(*m.f1, 0.0);
  }
}

TEST_CASE("rmse delta method round trip") {
  const RiskEstimate mse{156.25, 10.0, 50};
  const RiskEstimate rmse = mse_to_rmse(mse);
  CHECK(rmse.value == doctest::Approx(12.5).epsilon(1e-15));
  CHECK(rmse.se == doctest::Approx(0.4).epsilon(1e-15));
  const RiskEstimate back = rmse_to_mse(rmse);
  CHECK(std::abs(back.value - mse.value) < 1e-12);
  CHECK(std::abs(back.se - mse.se) < 1e-12);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const RiskEstimate v{std::exp(rng.normal()), std::exp(rng.normal() - 2.0), 10};
    const RiskEstimate rt = rmse_to_mse(mse_to_rmse(v));
    CHECK(std::abs(rt.value - v.value) <= 1e-12 * std::max(1.0, v.value));
    CHECK(std::abs(rt.se - v.se) <= 1e-12 * std::max(1.0, v.se));
  }
}

TEST_CASE("ordered summation statistics") {
  Eigen::VectorXd x(4);
  x << 0, 2, 4, 6;
  CHECK_EQ(mean_ordered(x), 3.0);
  CHECK(sample_variance(x) == doctest::Approx(20.0 / 3.0).epsilon(1e-15));
  Eigen::VectorXd y(4);
  y << 1, 0, 1, 0;
  CHECK(sample_covariance(x, y) == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(mean_ordered(Eigen::VectorXd(0)), InvalidInputError);
  CHECK_THROWS_AS(sample_variance(Eigen::VectorXd(1)), InvalidInputError);
}

TEST_CASE("quantiles and normal helpers") {
  const std::vector<double> sorted{1.0, 2.0, 3.0, 4.0};
  CHECK_EQ(quantile_sorted(sorted, 0.0), 1.0);
  CHECK_EQ(quantile_sorted(sorted, 1.0), 4.0);
  CHECK_EQ(quantile_sorted(sorted, 0.5), 2.5);
  CHECK_EQ(quantile_sorted(sorted, 0.25), 1.75);  // type-7 interpolation

  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  for (double p : {0.001, 0.025, 0.3, 0.5, 0.77, 0.999})
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));

  // sample placed exactly at normal quantiles has small KS distance
  std::vector<double> grid;
  for (int i = 1; i <= 400; ++i) grid.push_back(normal_quantile(i / 401.0));
  CHECK(ks_distance_normal(grid) < 0.01);
  std::vector<double> shifted = grid;
  for (double& v : shifted) v += 2.0;
  CHECK(ks_distance_normal(shifted) > 0.5);
}

TEST_CASE("seeded rng reproducibility") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const double va = a.normal(), vb = b.normal(), vc = c.normal();
    all_equal = all_equal && va == vb;
    any_diff = any_diff || va != vc;
  }
  CHECK(all_equal);
  CHECK(any_diff);

  CHECK_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
  CHECK_NE(derive_seed(1, 2), derive_seed(2, 1));
  CHECK_EQ(derive_seed(9, 4, 5), derive_seed(9, 4, 5));

  Rng r(5);
  const std::vector<Index> perm = r.permutation(40);
  std::vector<bool> hit(40, false);
  for (const Index i : perm) {
    REQUIRE(i >= 0);
    REQUIRE(i < 40);
    CHECK_FALSE(hit[static_cast<std::size_t>(i)]);
    hit[static_cast<std::size_t>(i)] = true;
  }
}
