#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ess/dataset.hpp"
#include "ess/types.hpp"

namespace ess {

/// Feature and outcome preprocessing, fitted on training rows only and frozen
/// for test application.
struct PreprocessOptions {
  /// Winsorization cut quantiles for the outcome in regression. Disabled when
  /// absent; classification outcomes are never winsorized.
  std::optional<std::pair<double, double>> winsorize_quantiles = std::pair{0.01, 0.99};
  /// Standardize numeric covariates, population-SD convention (divisor n).
  bool standardize_numeric = true;
  /// Categories seen fewer than this many times in training collapse to "other".
  Index rare_category_min_count = 50;
  /// Drop one one-hot indicator per categorical column as a reference level.
  bool one_hot_drop_reference = true;
  /// Train regression models on log(1+y); predictions are mapped back with
  /// expm1 and evaluated on the original scale.
  bool log_outcome = false;
};

struct TuningPolicy {
  /// Tune once per (family, N) on a seeded size-N subset, reused across blocks.
  /// When false, hyperparameters are re-tuned on each training block.
  bool per_n_subset = true;
  int lasso_folds = 5;
  int classification_folds = 3;  // stratified; never exceeds the minority class count
  int path_points = 30;
  double path_decades = 3.0;  // geometric penalty path spans this many decades
  std::vector<double> logit_c_grid{0.01, 0.1, 1.0, 10.0};
  std::vector<int> forest_depths{-1, 10, 20};  // -1 = unbounded
  std::vector<Index> forest_min_leaf{1, 5};
  Index forest_trees = 300;
  Index knn_k = 5;  // fixed; capped at the training-block size
};

enum class LearnerFamily { BaselineMean, BaselineMajority, Lasso, LogitL1, RandomForest, Knn };

const char* family_name(LearnerFamily family);
const char* family_display_name(LearnerFamily family);
LearnerFamily parse_family(const std::string& token);

struct LearnerSpec {
  LearnerFamily family = LearnerFamily::Lasso;
  PreprocessOptions preprocess;
  TuningPolicy tuning;
};

struct Hyperparams {
  std::optional<double> lasso_lambda;
  std::optional<double> logit_c;
  std::optional<int> forest_depth;
  std::optional<Index> forest_min_leaf;
  std::optional<Index> knn_k;
  /// Tuning subset contained a single class; training falls back to the
  /// majority-class constant rule.
  bool majority_fallback = false;
  /// Policy requested per-block tuning; hyperparameters resolve at train time.
  bool tune_on_block = false;

  std::string describe() const;
};

/// Frozen preprocessing statistics mapping dataset rows to model features.
struct FittedTransform {
  struct NumericFeature {
    Index col = 0;
    double mean = 0.0;
    double sd = 1.0;
    bool constant = false;  // zero training SD; scaling skipped
  };
  struct CategoricalFeature {
    Index col = 0;
    std::vector<Index> code_to_slot;  // per training-vocabulary code; -1 = dropped
    Index other_slot = -1;            // slot for rare and unseen categories; -1 = dropped
    Index width = 0;
  };

  std::vector<NumericFeature> numeric;
  std::vector<CategoricalFeature> categorical;
  Index width = 0;
  bool standardize = true;

  bool winsorized = false;
  double winsor_lo = 0.0, winsor_hi = 0.0;
  bool log_outcome = false;

  void feature_row(const Dataset& data, Index row, double* out) const;
  Eigen::MatrixXd features(const Dataset& data, std::span<const Index> rows) const;

  double transform_outcome(double y) const;
  double back_transform(double pred) const;
  Eigen::VectorXd training_outcomes(const Dataset& data, std::span<const Index> rows) const;
};

/// Fit preprocessing statistics on exactly the given rows.
FittedTransform preprocess_fit(const Dataset& data, std::span<const Index> rows,
                               const PreprocessOptions& options);

struct RuleProvenance {
  std::string source;       // family or "fixed_rule"
  std::string hyperparams;
  std::uint64_t seed = 0;
  Index trained_on = 0;     // training rows
};

/// Deterministic evaluable map from dataset rows to predicted outcomes.
/// Classification rules emit label codes from the dataset outcome vocabulary.
class PredictionRule {
 public:
  virtual ~PredictionRule() = default;
  virtual void predict_rows(const Dataset& data, std::span<const Index> rows,
                            Eigen::Ref<Eigen::VectorXd> out) const = 0;
  Eigen::VectorXd predict(const Dataset& data, std::span<const Index> rows) const {
    Eigen::VectorXd out(static_cast<Index>(rows.size()));
    predict_rows(data, rows, out);
    return out;
  }

  RuleProvenance provenance;
};

/// Training contract: tune once per training-set size, then fit per block.
/// Custom learners plug into the cross-validation engine through this interface.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual Hyperparams tune(const Dataset& data, Index train_size, std::uint64_t seed) const = 0;
  virtual std::unique_ptr<PredictionRule> train(const Dataset& data, std::span<const Index> rows,
                                                const Hyperparams& hp, std::uint64_t seed) const = 0;
  virtual std::string name() const = 0;
  virtual std::string display_name() const { return name(); }
};

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec);

Hyperparams tune(const LearnerSpec& spec, const Dataset& data, Index train_size,
                 std::uint64_t seed);
std::unique_ptr<PredictionRule> train(const LearnerSpec& spec, const Hyperparams& hp,
                                      const Dataset& data, std::span<const Index> rows,
                                      std::uint64_t seed);

}  // namespace ess
