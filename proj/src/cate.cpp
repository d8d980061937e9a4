#include "ess/cate.hpp"

#include <sstream>

namespace ess {

namespace {

std::vector<std::string> decode_covariate(const Column& col) {
  std::vector<std::string> out(static_cast<std::size_t>(col.values.size()));
  for (Index i = 0; i < col.values.size(); ++i)
    out[static_cast<std::size_t>(i)] = col.labels[static_cast<std::size_t>(col.values(i))];
  return out;
}

void copy_covariates(const Dataset& from, Dataset& to) {
  for (const Index c : from.covariate_columns()) {
    const Column& col = from.column(c);
    if (col.categorical)
      to.add_categorical_covariate(col.name, decode_covariate(col));
    else
      to.add_numeric(col.name, ColumnRole::CovariateNumeric, col.values);
  }
}

}  // namespace

double transformed_outcome(double y, double t, double pi) {
  return y * (t - pi) / (pi * (1.0 - pi));
}

Dataset with_transformed_outcome(const Dataset& data, const OverlapOptions& opts) {
  data.validate();
  const auto rule_idx = data.find_role(ColumnRole::FixedRulePrediction);
  if (!rule_idx) throw DataError("CATE inference needs a fixed-rule prediction column");
  const Column& rule = data.column(*rule_idx);
  if (rule.categorical) throw DataError("the CATE prediction column must be numeric");

  Dataset out;
  copy_covariates(data, out);

  if (const auto pre = data.find_role(ColumnRole::TransformedOutcome)) {
    out.add_numeric(data.column(*pre).name, ColumnRole::Outcome, data.column(*pre).values);
  } else {
    const auto t_idx = data.find_role(ColumnRole::Treatment);
    const auto p_idx = data.find_role(ColumnRole::Propensity);
    if (!t_idx || !p_idx)
      throw DataError("transformed outcome needs treatment and propensity columns");
    if (data.outcome_kind() != OutcomeKind::Numeric)
      throw DataError("transformed outcome needs a numeric base outcome");
    const Eigen::VectorXd& y = data.outcome_values();
    const Eigen::VectorXd& t = data.column(*t_idx).values;
    const Eigen::VectorXd& pi = data.column(*p_idx).values;

    std::ostringstream bad;
    Index n_bad = 0;
    for (Index i = 0; i < data.n_rows(); ++i) {
      if (pi(i) < opts.epsilon || pi(i) > 1.0 - opts.epsilon) {
        if (n_bad < 20) bad << (n_bad ? ", " : "") << (i + 1);
        ++n_bad;
      }
    }
    if (n_bad > 0) {
      std::ostringstream msg;
      msg << "overlap violated at epsilon=" << opts.epsilon << " on " << n_bad
          << " row(s): " << bad.str();
      if (n_bad > 20) msg << ", ...";
      throw DataError(msg.str());
    }

    Eigen::VectorXd ytilde(data.n_rows());
    for (Index i = 0; i < data.n_rows(); ++i)
      ytilde(i) = transformed_outcome(y(i), t(i), pi(i));
    out.add_numeric("ytilde", ColumnRole::Outcome, ytilde);
  }

  out.add_numeric(rule.name, ColumnRole::FixedRulePrediction, rule.values);
  out.validate();
  return out;
}

Dataset cate_dataset(const Dataset& data, const OverlapOptions& opts) {
  return with_transformed_outcome(data, opts);
}

std::vector<Index> arm_rows(const Dataset& data, int arm) {
  const auto t_idx = data.find_role(ColumnRole::Treatment);
  if (!t_idx) throw DataError("arm analysis needs a treatment column");
  const Eigen::VectorXd& t = data.column(*t_idx).values;
  std::vector<Index> rows;
  for (Index i = 0; i < data.n_rows(); ++i)
    if (t(i) == static_cast<double>(arm)) rows.push_back(i);
  return rows;
}

Dataset arm_dataset(const Dataset& data, int arm) {
  data.validate();
  if (arm != 0 && arm != 1) throw InvalidInputError("treatment arm must be 0 or 1");
  const std::vector<Index> rows = arm_rows(data, arm);
  if (rows.empty())
    throw DataError("no rows with treatment " + std::to_string(arm));
  const Dataset sub = data.subset(rows);

  const ColumnRole arm_role =
      arm == 0 ? ColumnRole::ArmPrediction0 : ColumnRole::ArmPrediction1;
  auto rule_idx = sub.find_role(arm_role);
  if (!rule_idx) rule_idx = sub.find_role(ColumnRole::FixedRulePrediction);
  if (!rule_idx)
    throw DataError("arm analysis needs an arm-specific or shared fixed-rule column");
  const Column& rule = sub.column(*rule_idx);

  Dataset out;
  copy_covariates(sub, out);
  const Column& y = sub.outcome();
  if (y.categorical) {
    std::vector<std::string> labels(static_cast<std::size_t>(sub.n_rows()));
    for (Index i = 0; i < sub.n_rows(); ++i)
      labels[static_cast<std::size_t>(i)] = sub.label_text(y.values(i));
    out.add_categorical(y.name, ColumnRole::Outcome, labels);
    std::vector<std::string> preds(static_cast<std::size_t>(sub.n_rows()));
    for (Index i = 0; i < sub.n_rows(); ++i)
      preds[static_cast<std::size_t>(i)] = sub.label_text(rule.values(i));
    out.add_categorical(rule.name, ColumnRole::FixedRulePrediction, preds);
  } else {
    out.add_numeric(y.name, ColumnRole::Outcome, y.values);
    if (rule.categorical) throw DataError("arm prediction column must match the outcome type");
    out.add_numeric(rule.name, ColumnRole::FixedRulePrediction, rule.values);
  }
  out.validate();
  return out;
}

SequentialResult cate_ess(const Dataset& data, const Learner& learner, const TrainingGrid& grid,
                          const LossFunction& loss, const StepOptions& opts,
                          const OverlapOptions& overlap, bool curve_mode) {
  if (loss.kind != LossKind::Squared)
    throw InvalidInputError("CATE inference supports squared loss only");
  const Dataset derived = with_transformed_outcome(data, overlap);
  return sequential_ess(derived, learner, grid, loss, opts, curve_mode);
}

SequentialResult arm_specific_ess(const Dataset& data, const Learner& learner,
                                  const TrainingGrid& grid, const LossFunction& loss,
                                  const StepOptions& opts, int arm, bool curve_mode) {
  const Dataset sub = arm_dataset(data, arm);
  return sequential_ess(sub, learner, grid, loss, opts, curve_mode);
}

}  // namespace ess
