#pragma once

#include <optional>
#include <span>
#include <string>

#include "ess/dataset.hpp"
#include "ess/types.hpp"

namespace ess {

enum class LossKind { Squared, ZeroOne };

/// Pointwise loss. Squared loss applies to numeric outcomes, zero-one loss to
/// label codes; the typed entry point enforces the pairing.
struct LossFunction {
  LossKind kind = LossKind::Squared;

  static LossFunction squared() { return {LossKind::Squared}; }
  static LossFunction zero_one() { return {LossKind::ZeroOne}; }

  double operator()(double y_true, double y_pred) const {
    if (kind == LossKind::Squared) {
      const double d = y_pred - y_true;
      return d * d;
    }
    return y_true == y_pred ? 0.0 : 1.0;
  }

  const char* name() const { return kind == LossKind::Squared ? "squared" : "zero_one"; }

  bool compatible(OutcomeKind outcome) const {
    return kind == LossKind::Squared ? outcome == OutcomeKind::Numeric
                                     : outcome == OutcomeKind::Categorical;
  }
};

/// A single outcome or prediction value with its type tag.
struct OutcomeValue {
  double value = 0.0;
  bool is_label = false;
};

/// Typed loss evaluation; throws InvalidInputError on loss/outcome mismatch.
double evaluate_loss(const LossFunction& loss, const OutcomeValue& y_true,
                     const OutcomeValue& y_pred);

/// Difference loss bound to a dataset: delta(pred, i) is the learner's loss at
/// row i minus the fixed rule's loss at row i. Running block-out CV on delta
/// estimates the risk difference directly.
class DifferenceLoss {
 public:
  DifferenceLoss(const Dataset& data, const LossFunction& loss);
  double operator()(Index row, double pred) const;

 private:
  const Dataset& data_;
  LossFunction loss_;
  const Eigen::VectorXd* rule_;
};

/// Point risk estimate with its standard error, on the loss scale.
struct RiskEstimate {
  double value = 0.0;
  double se = 0.0;
  Index n = 0;
};

/// Mean pointwise loss of the fixed-rule prediction column with the sample
/// standard error of the loss draws.
RiskEstimate fixed_rule_risk(const Dataset& data, const LossFunction& loss);
RiskEstimate fixed_rule_risk_rows(const Dataset& data, const LossFunction& loss,
                                  std::span<const Index> rows);

/// Delta-method transform of a mean-squared-error estimate to the RMSE scale:
/// rmse = sqrt(mse), se_rmse = se_mse / (2 rmse).
RiskEstimate mse_to_rmse(const RiskEstimate& mse);
RiskEstimate rmse_to_mse(const RiskEstimate& rmse);

/// Confusion-matrix summary for binary 0/1 labels. Degenerate denominators are
/// reported through flags and absent values rather than NaN.
struct MetricsResult {
  double accuracy = 0.0;
  std::optional<double> balanced_accuracy;
  std::optional<double> f1;
  bool balanced_accuracy_degenerate = false;
  bool f1_degenerate = false;
  Index tp = 0, tn = 0, fp = 0, fn = 0;
};

MetricsResult aggregate_metrics(std::span<const int> y_true, std::span<const int> y_pred);

}  // namespace ess
