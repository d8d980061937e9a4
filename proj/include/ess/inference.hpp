#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ess/block_cv.hpp"
#include "ess/variance.hpp"

namespace ess {

/// Candidate training sizes, strictly increasing. The largest size must leave
/// at least two blocks.
struct TrainingGrid {
  std::vector<Index> sizes;

  static TrainingGrid explicit_sizes(std::vector<Index> sizes);
  static TrainingGrid geometric(Index lo, Index hi, Index points);
  static TrainingGrid parse(const std::string& text);

  void validate(Index n_rows) const;
};

struct StepOptions {
  double alpha = 0.05;
  VarianceMode variance_mode = VarianceMode::ExactDifference;
  Index regime_threshold = 400;
  std::uint64_t seed = 0;
};

/// One-sided test of "learner at size N still loses to the fixed rule".
/// rejected is defined as lb > 0; the t statistic is reported alongside and
/// agrees except in sign conventions at zero variance.
struct Decision {
  double t_stat = 0.0;
  double lb = 0.0;
  bool rejected = false;
  bool degenerate_variance = false;
};

Decision studentized_decision(double diff, double sigma2, Index n_effective, double alpha);

struct StepResult {
  Index train_size = 0;
  Index blocks = 0;
  Index n_effective = 0;
  double e_cv = 0.0;
  double e_rule = 0.0;
  double diff = 0.0;
  double sigma_hat = 0.0;
  double se = 0.0;
  double risk_se = 0.0;
  VarianceRegime regime = VarianceRegime::FixedN;
  double t_stat = 0.0;
  double lb = 0.0;
  bool rejected = false;
  bool degenerate_variance = false;
  bool variance_clipped = false;
  VarianceEstimate variance;
  VarianceEstimate learner_variance;
  std::string hyperparams;
};

StepResult test_step(const Dataset& data, const Learner& learner, Index train_size,
                     const LossFunction& loss, const StepOptions& opts);

/// Walks the grid in order, stopping at the first size whose test fails to
/// reject. n_hat is 1 when the very first size already fails, N_{k-1}+1 when
/// size N_k is the first failure, and N_K+1 with exhausted set when every
/// size rejects. curve_mode evaluates the whole grid but applies the same
/// stopping definition.
struct SequentialResult {
  std::vector<StepResult> steps;
  Index stop_index = -1;
  Index n_hat = 0;
  bool exhausted = false;
  double alpha = 0.05;
  std::optional<std::string> error;
};

SequentialResult sequential_ess(const Dataset& data, const Learner& learner,
                                const TrainingGrid& grid, const LossFunction& loss,
                                const StepOptions& opts, bool curve_mode);

/// Smallest evaluated size whose CV risk does not exceed the fixed rule's,
/// or -1 when the curve never crosses.
Index plugin_ess(const std::vector<StepResult>& steps);

struct RiskIncrease {
  Index from = 0;
  Index to = 0;
  double delta = 0.0;
  double combined_se = 0.0;
  bool within_noise = true;
};

struct MonotonicityReport {
  bool monotone_within_noise = true;
  std::vector<RiskIncrease> increases;
};

/// Lists adjacent grid steps where the learner risk rises. An increase is
/// within noise when it stays under twice the combined standard error of the
/// two estimates. Diagnostic only; nothing is smoothed.
MonotonicityReport check_monotonicity(const std::vector<StepResult>& steps);

bool duality_holds(const std::vector<StepResult>& steps);

}  // namespace ess
