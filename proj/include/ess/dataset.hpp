#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ess/types.hpp"

namespace ess {

enum class ColumnRole {
  CovariateNumeric,
  CovariateCategorical,
  Outcome,
  FixedRulePrediction,
  Treatment,
  Propensity,
  TransformedOutcome,
  ArmPrediction0,
  ArmPrediction1,
};

const char* role_name(ColumnRole role);

enum class OutcomeKind { Numeric, Categorical };

/// One typed column. Categorical columns store label codes in `values`;
/// covariate columns carry their own vocabulary, while the outcome and every
/// prediction column share the dataset-level outcome vocabulary so codes are
/// directly comparable under the zero-one loss.
struct Column {
  std::string name;
  ColumnRole role = ColumnRole::CovariateNumeric;
  bool categorical = false;
  Eigen::VectorXd values;
  std::vector<std::string> labels;  // per-column vocabulary (categorical covariates only)
};

/// Immutable-after-construction analysis sample: covariates, outcome, optional
/// fixed-rule predictions and experiment columns. Rows are complete; ingestion
/// rejects missing values before a Dataset is built.
class Dataset {
 public:
  Index n_rows() const { return n_; }
  Index n_columns() const { return static_cast<Index>(cols_.size()); }
  const Column& column(Index i) const { return cols_[static_cast<std::size_t>(i)]; }

  void add_numeric(std::string name, ColumnRole role, Eigen::VectorXd values);
  void add_categorical_covariate(std::string name, const std::vector<std::string>& values);
  /// Outcome or prediction column with string labels, interned into the shared
  /// outcome vocabulary (new labels extend it, e.g. a prediction class never
  /// seen among the outcomes).
  void add_categorical(std::string name, ColumnRole role, const std::vector<std::string>& values);

  /// Enforces schema invariants: exactly one outcome, each special role at most
  /// once, prediction columns typed like the outcome, treatment in {0,1},
  /// propensity in (0,1), equal column lengths.
  void validate() const;

  std::optional<Index> find_role(ColumnRole role) const;
  bool has_role(ColumnRole role) const { return find_role(role).has_value(); }
  const Column& role_column(ColumnRole role) const;

  const Column& outcome() const { return role_column(ColumnRole::Outcome); }
  OutcomeKind outcome_kind() const {
    return outcome().categorical ? OutcomeKind::Categorical : OutcomeKind::Numeric;
  }
  const Eigen::VectorXd& outcome_values() const { return outcome().values; }

  std::vector<Index> covariate_columns() const;

  const std::vector<std::string>& outcome_labels() const { return outcome_labels_; }
  /// Code for a label in the shared outcome vocabulary, appending if new.
  Index intern_outcome_label(const std::string& label);

  std::string label_text(double code) const;

  /// Row subset (copying); used for treatment-arm analyses.
  Dataset subset(std::span<const Index> rows) const;

 private:
  void check_new_column(const std::string& name, ColumnRole role, Index rows);

  std::vector<Column> cols_;
  std::vector<std::string> outcome_labels_;
  Index n_ = -1;  // -1 until the first column fixes the row count
};

}  // namespace ess
