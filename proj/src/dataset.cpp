#include "ess/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ess {

const char* role_name(ColumnRole role) {
  switch (role) {
    case ColumnRole::CovariateNumeric: return "covariate_numeric";
    case ColumnRole::CovariateCategorical: return "covariate_categorical";
    case ColumnRole::Outcome: return "outcome";
    case ColumnRole::FixedRulePrediction: return "fixed_rule_prediction";
    case ColumnRole::Treatment: return "treatment";
    case ColumnRole::Propensity: return "propensity";
    case ColumnRole::TransformedOutcome: return "transformed_outcome";
    case ColumnRole::ArmPrediction0: return "arm_prediction_0";
    case ColumnRole::ArmPrediction1: return "arm_prediction_1";
  }
  return "unknown";
}

namespace {

bool unique_role(ColumnRole role) {
  return role != ColumnRole::CovariateNumeric && role != ColumnRole::CovariateCategorical;
}

bool prediction_role(ColumnRole role) {
  return role == ColumnRole::FixedRulePrediction || role == ColumnRole::ArmPrediction0 ||
         role == ColumnRole::ArmPrediction1;
}

}  // namespace

void Dataset::check_new_column(const std::string& name, ColumnRole role, Index rows) {
  if (n_ >= 0 && rows != n_) {
    std::ostringstream os;
    os << "column '" << name << "' has " << rows << " rows, expected " << n_;
    throw DataError(os.str());
  }
  for (const auto& c : cols_) {
    if (c.name == name) throw DataError("duplicate column name '" + name + "'");
    if (unique_role(role) && c.role == role)
      throw DataError(std::string("duplicate role ") + role_name(role));
  }
}

void Dataset::add_numeric(std::string name, ColumnRole role, Eigen::VectorXd values) {
  if (role == ColumnRole::CovariateCategorical)
    throw InvalidInputError("add_numeric: categorical role for numeric column");
  check_new_column(name, role, values.size());
  if (n_ < 0) n_ = values.size();
  Column c;
  c.name = std::move(name);
  c.role = role;
  c.values = std::move(values);
  cols_.push_back(std::move(c));
}

Index Dataset::intern_outcome_label(const std::string& label) {
  for (std::size_t i = 0; i < outcome_labels_.size(); ++i)
    if (outcome_labels_[i] == label) return static_cast<Index>(i);
  outcome_labels_.push_back(label);
  return static_cast<Index>(outcome_labels_.size()) - 1;
}

void Dataset::add_categorical_covariate(std::string name, const std::vector<std::string>& values) {
  check_new_column(name, ColumnRole::CovariateCategorical, static_cast<Index>(values.size()));
  if (n_ < 0) n_ = static_cast<Index>(values.size());
  Column c;
  c.name = std::move(name);
  c.role = ColumnRole::CovariateCategorical;
  c.categorical = true;
  c.values.resize(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    Index code = -1;
    for (std::size_t j = 0; j < c.labels.size(); ++j)
      if (c.labels[j] == values[i]) { code = static_cast<Index>(j); break; }
    if (code < 0) {
      c.labels.push_back(values[i]);
      code = static_cast<Index>(c.labels.size()) - 1;
    }
    c.values(static_cast<Index>(i)) = static_cast<double>(code);
  }
  cols_.push_back(std::move(c));
}

void Dataset::add_categorical(std::string name, ColumnRole role,
                              const std::vector<std::string>& values) {
  if (role == ColumnRole::CovariateCategorical) {
    add_categorical_covariate(std::move(name), values);
    return;
  }
  if (role != ColumnRole::Outcome && !prediction_role(role))
    throw InvalidInputError("add_categorical: role cannot be categorical");
  check_new_column(name, role, static_cast<Index>(values.size()));
  if (n_ < 0) n_ = static_cast<Index>(values.size());
  Column c;
  c.name = std::move(name);
  c.role = role;
  c.categorical = true;
  c.values.resize(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    c.values(static_cast<Index>(i)) = static_cast<double>(intern_outcome_label(values[i]));
  cols_.push_back(std::move(c));
}

void Dataset::validate() const {
  if (n_ <= 0) throw DataError("dataset is empty");
  Index n_outcomes = 0;
  for (const auto& c : cols_) {
    if (c.values.size() != n_) throw DataError("column '" + c.name + "' length mismatch");
    if (c.role == ColumnRole::Outcome) ++n_outcomes;
  }
  if (n_outcomes != 1) throw DataError("dataset must declare exactly one outcome column");

  const bool outcome_cat = outcome().categorical;
  for (const auto& c : cols_) {
    if (prediction_role(c.role) && c.categorical != outcome_cat) {
      std::ostringstream os;
      os << "column '" << c.name << "' (" << role_name(c.role) << ") must be "
         << (outcome_cat ? "categorical" : "numeric") << " to match the outcome";
      throw DataError(os.str());
    }
    if (c.role == ColumnRole::Treatment) {
      for (Index i = 0; i < n_; ++i) {
        const double t = c.values(i);
        if (t != 0.0 && t != 1.0) {
          std::ostringstream os;
          os << "treatment column '" << c.name << "' has value " << t << " at row " << i + 1
             << "; expected 0 or 1";
          throw DataError(os.str());
        }
      }
    }
    if (c.role == ColumnRole::Propensity) {
      for (Index i = 0; i < n_; ++i) {
        const double p = c.values(i);
        if (!(p > 0.0 && p < 1.0) || !std::isfinite(p)) {
          std::ostringstream os;
          os << "propensity column '" << c.name << "' has value " << p << " at row " << i + 1
             << "; expected a value strictly inside (0,1)";
          throw DataError(os.str());
        }
      }
    }
  }
}

std::optional<Index> Dataset::find_role(ColumnRole role) const {
  for (std::size_t i = 0; i < cols_.size(); ++i)
    if (cols_[i].role == role) return static_cast<Index>(i);
  return std::nullopt;
}

const Column& Dataset::role_column(ColumnRole role) const {
  const auto idx = find_role(role);
  if (!idx) throw DataError(std::string("dataset has no ") + role_name(role) + " column");
  return cols_[static_cast<std::size_t>(*idx)];
}

std::vector<Index> Dataset::covariate_columns() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < cols_.size(); ++i)
    if (cols_[i].role == ColumnRole::CovariateNumeric ||
        cols_[i].role == ColumnRole::CovariateCategorical)
      out.push_back(static_cast<Index>(i));
  return out;
}

std::string Dataset::label_text(double code) const {
  const auto i = static_cast<std::size_t>(code);
  if (i >= outcome_labels_.size()) return "<code " + std::to_string(code) + ">";
  return outcome_labels_[i];
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.n_ = static_cast<Index>(rows.size());
  out.outcome_labels_ = outcome_labels_;
  for (const auto& c : cols_) {
    Column sc;
    sc.name = c.name;
    sc.role = c.role;
    sc.categorical = c.categorical;
    sc.labels = c.labels;
    sc.values.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) sc.values(static_cast<Index>(i)) = c.values(rows[i]);
    out.cols_.push_back(std::move(sc));
  }
  return out;
}

}  // namespace ess
