#pragma once

#include "ess/dataset.hpp"
#include "ess/inference.hpp"

namespace ess {

/// alpha-trimmed overlap: propensities must stay inside [epsilon, 1-epsilon].
/// Violations abort rather than clip, since clipping biases the transform.
struct OverlapOptions {
  double epsilon = 0.01;
};

/// Y * (T - pi) / (pi * (1 - pi)); conditionally unbiased for the CATE under
/// unconfoundedness with known propensity.
double transformed_outcome(double y, double t, double pi);

/// Derives the regression dataset for CATE inference: covariates carry over,
/// the outcome becomes the transformed outcome, and the fixed-rule column is
/// reinterpreted as a CATE prediction. If the input already supplies a
/// transformed-outcome column it is used as given; otherwise treatment,
/// propensity, and a numeric outcome are required.
Dataset with_transformed_outcome(const Dataset& data, const OverlapOptions& opts);

/// ESS of the learner for predicting the transformed outcome against the
/// fixed CATE rule. Squared loss only; the risk ranking of CATE predictors
/// under the transformed outcome matches the ranking under the true CATE
/// only for squared error.
SequentialResult cate_ess(const Dataset& data, const Learner& learner, const TrainingGrid& grid,
                          const LossFunction& loss, const StepOptions& opts,
                          const OverlapOptions& overlap, bool curve_mode);

/// ESS within one treatment arm. Prefers the arm-specific prediction column
/// when present, otherwise falls back to the shared fixed-rule column. All
/// sample-size scalings use the arm's own row count.
SequentialResult arm_specific_ess(const Dataset& data, const Learner& learner,
                                  const TrainingGrid& grid, const LossFunction& loss,
                                  const StepOptions& opts, int arm, bool curve_mode);

/// Rows of the T=arm subsample, in original order.
std::vector<Index> arm_rows(const Dataset& data, int arm);

/// The dataset an arm run operates on (exposed for reporting).
Dataset arm_dataset(const Dataset& data, int arm);

Dataset cate_dataset(const Dataset& data, const OverlapOptions& opts);

}  // namespace ess
