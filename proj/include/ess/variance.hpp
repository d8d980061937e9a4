#pragma once

#include "ess/block_cv.hpp"
#include "ess/types.hpp"

namespace ess {

/// Two asymptotic regimes for the CV risk estimate. With small blocks the
/// between-block spread of trained rules matters and the plug-in variance
/// combines training and evaluation contributions; with large blocks the
/// trained rules stabilise and only the evaluation spread remains.
enum class VarianceRegime { FixedN, FixedB };

const char* regime_name(VarianceRegime regime);

VarianceRegime select_regime(Index train_size, Index threshold);

/// Plug-in variance of sqrt(n_eff) * (e_cv - e). Components are kept for
/// diagnostics; sigma2 = N*train + test + 2*N*cross, clipped at zero.
struct VarianceEstimate {
  double sigma2 = 0.0;
  double train_component = 0.0;
  double test_component = 0.0;
  double cross_component = 0.0;
  VarianceRegime regime = VarianceRegime::FixedN;
  bool clipped = false;
};

VarianceEstimate variance_fixed_n(const BlockCvResult& cv);
VarianceEstimate variance_fixed_b(const BlockCvResult& cv);
VarianceEstimate variance_for_regime(const BlockCvResult& cv, VarianceRegime regime);

enum class VarianceMode { ExactDifference, Conservative };

const char* variance_mode_name(VarianceMode mode);

/// Variance of the risk gap between learner and fixed rule. Exact mode
/// studentises the pointwise difference losses; conservative mode ignores
/// their correlation and adds the fixed rule's loss variance on top of the
/// learner's.
VarianceEstimate variance_of_difference(const CvRun& run, VarianceMode mode,
                                        VarianceRegime regime);

}  // namespace ess
