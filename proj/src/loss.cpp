#include "ess/loss.hpp"

#include <cmath>

#include "ess/stats.hpp"

namespace ess {

double evaluate_loss(const LossFunction& loss, const OutcomeValue& y_true,
                     const OutcomeValue& y_pred) {
  if (y_true.is_label != y_pred.is_label)
    throw InvalidInputError("evaluate_loss: mixed label and numeric values");
  if (loss.kind == LossKind::Squared && y_true.is_label)
    throw InvalidInputError("evaluate_loss: squared loss applied to labels");
  if (loss.kind == LossKind::ZeroOne && !y_true.is_label)
    throw InvalidInputError("evaluate_loss: zero_one loss applied to numeric values");
  return loss(y_true.value, y_pred.value);
}

DifferenceLoss::DifferenceLoss(const Dataset& data, const LossFunction& loss)
    : data_(data), loss_(loss) {
  rule_ = &data.role_column(ColumnRole::FixedRulePrediction).values;
  if (!loss.compatible(data.outcome_kind()))
    throw InvalidInputError("difference loss: loss incompatible with outcome type");
}

double DifferenceLoss::operator()(Index row, double pred) const {
  const double y = data_.outcome_values()(row);
  return loss_(y, pred) - loss_(y, (*rule_)(row));
}

namespace {

RiskEstimate mean_loss_with_se(const Eigen::VectorXd& y, const Eigen::VectorXd& pred,
                               const LossFunction& loss, std::span<const Index> rows) {
  if (rows.empty()) throw InvalidInputError("risk estimate over empty row set");
  Eigen::VectorXd losses(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    losses(static_cast<Index>(i)) = loss(y(rows[i]), pred(rows[i]));
  RiskEstimate r;
  r.n = static_cast<Index>(rows.size());
  r.value = mean_ordered(losses);
  r.se = r.n > 1 ? std::sqrt(sample_variance(losses) / static_cast<double>(r.n)) : 0.0;
  return r;
}

}  // namespace

RiskEstimate fixed_rule_risk(const Dataset& data, const LossFunction& loss) {
  std::vector<Index> rows(static_cast<std::size_t>(data.n_rows()));
  for (Index i = 0; i < data.n_rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  return fixed_rule_risk_rows(data, loss, rows);
}

RiskEstimate fixed_rule_risk_rows(const Dataset& data, const LossFunction& loss,
                                  std::span<const Index> rows) {
  if (!loss.compatible(data.outcome_kind()))
    throw InvalidInputError("fixed_rule_risk: loss incompatible with outcome type");
  const auto& rule = data.role_column(ColumnRole::FixedRulePrediction).values;
  return mean_loss_with_se(data.outcome_values(), rule, loss, rows);
}

RiskEstimate mse_to_rmse(const RiskEstimate& mse) {
  if (mse.value < 0.0) throw InvalidInputError("mse_to_rmse: negative risk");
  RiskEstimate r;
  r.n = mse.n;
  r.value = std::sqrt(mse.value);
  r.se = r.value > 0.0 ? mse.se / (2.0 * r.value) : 0.0;
  return r;
}

RiskEstimate rmse_to_mse(const RiskEstimate& rmse) {
  RiskEstimate r;
  r.n = rmse.n;
  r.value = rmse.value * rmse.value;
  r.se = 2.0 * rmse.value * rmse.se;
  return r;
}

MetricsResult aggregate_metrics(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw InvalidInputError("aggregate_metrics: length mismatch");
  if (y_true.empty()) throw InvalidInputError("aggregate_metrics: empty input");
  MetricsResult m;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if ((y_true[i] != 0 && y_true[i] != 1) || (y_pred[i] != 0 && y_pred[i] != 1))
      throw InvalidInputError("aggregate_metrics: labels must be 0 or 1");
    if (y_true[i] == 1)
      y_pred[i] == 1 ? ++m.tp : ++m.fn;
    else
      y_pred[i] == 0 ? ++m.tn : ++m.fp;
  }
  const double n = static_cast<double>(y_true.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / n;

  const Index pos = m.tp + m.fn;
  const Index neg = m.tn + m.fp;
  if (pos == 0 || neg == 0) {
    m.balanced_accuracy_degenerate = true;  // a class is absent from y_true
  } else {
    const double recall_pos = static_cast<double>(m.tp) / static_cast<double>(pos);
    const double recall_neg = static_cast<double>(m.tn) / static_cast<double>(neg);
    m.balanced_accuracy = 0.5 * (recall_pos + recall_neg);
  }

  const Index f1_denom = 2 * m.tp + m.fp + m.fn;
  if (f1_denom == 0)
    m.f1_degenerate = true;  // no positives in truth or prediction
  else
    m.f1 = 2.0 * static_cast<double>(m.tp) / static_cast<double>(f1_denom);
  return m;
}

}  // namespace ess
