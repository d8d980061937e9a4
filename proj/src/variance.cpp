#include "ess/variance.hpp"

#include "ess/stats.hpp"

namespace ess {

const char* regime_name(VarianceRegime regime) {
  return regime == VarianceRegime::FixedN ? "fixed_n" : "fixed_b";
}

VarianceRegime select_regime(Index train_size, Index threshold) {
  return train_size <= threshold ? VarianceRegime::FixedN : VarianceRegime::FixedB;
}

VarianceEstimate variance_fixed_n(const BlockCvResult& cv) {
  if (cv.blocks < 2) throw InvalidInputError("variance needs at least two blocks");
  VarianceEstimate est;
  est.regime = VarianceRegime::FixedN;
  est.train_component = sample_variance(cv.block_risks);
  est.test_component = sample_variance(cv.mu_hat);
  est.cross_component = sample_covariance(cv.block_risks, cv.m_hat);
  const auto N = static_cast<double>(cv.train_size);
  const double sigma2 =
      N * est.train_component + est.test_component + 2.0 * N * est.cross_component;
  if (sigma2 < 0.0) {
    est.sigma2 = 0.0;
    est.clipped = true;
  } else {
    est.sigma2 = sigma2;
  }
  return est;
}

VarianceEstimate variance_fixed_b(const BlockCvResult& cv) {
  if (cv.blocks < 2) throw InvalidInputError("variance needs at least two blocks");
  if (cv.n_effective() < 2) throw InvalidInputError("variance needs at least two rows");
  VarianceEstimate est;
  est.regime = VarianceRegime::FixedB;
  // mu_hat averages to e_cv exactly, so this is the sample variance of mu_hat
  // centred at the CV risk.
  double acc = 0.0;
  for (Index i = 0; i < cv.mu_hat.size(); ++i) {
    const double d = cv.mu_hat(i) - cv.e_cv;
    acc += d * d;
  }
  est.test_component = acc / static_cast<double>(cv.mu_hat.size() - 1);
  est.sigma2 = est.test_component;
  return est;
}

VarianceEstimate variance_for_regime(const BlockCvResult& cv, VarianceRegime regime) {
  return regime == VarianceRegime::FixedN ? variance_fixed_n(cv) : variance_fixed_b(cv);
}

const char* variance_mode_name(VarianceMode mode) {
  return mode == VarianceMode::ExactDifference ? "diff" : "conservative";
}

VarianceEstimate variance_of_difference(const CvRun& run, VarianceMode mode,
                                        VarianceRegime regime) {
  if (mode == VarianceMode::ExactDifference) {
    if (!run.difference_cv) throw InvalidInputError("run carries no difference losses");
    return variance_for_regime(*run.difference_cv, regime);
  }
  if (run.rule_losses.size() < 2) throw InvalidInputError("run carries no fixed-rule losses");
  VarianceEstimate est = variance_for_regime(run.learner_cv, regime);
  est.sigma2 += sample_variance(run.rule_losses);
  return est;
}

}  // namespace ess
