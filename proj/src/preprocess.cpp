#include <algorithm>
#include <cmath>
#include <map>

#include "ess/learner.hpp"
#include "ess/stats.hpp"

namespace ess {

FittedTransform preprocess_fit(const Dataset& data, std::span<const Index> rows,
                               const PreprocessOptions& options) {
  if (rows.empty()) throw InvalidInputError("preprocess_fit: empty training set");
  FittedTransform tf;
  tf.standardize = options.standardize_numeric;

  for (const Index ci : data.covariate_columns()) {
    const Column& col = data.column(ci);
    if (!col.categorical) {
      FittedTransform::NumericFeature f;
      f.col = ci;
      double s = 0.0;
      for (const Index r : rows) s += col.values(r);
      f.mean = s / static_cast<double>(rows.size());
      double ss = 0.0;
      for (const Index r : rows) {
        const double d = col.values(r) - f.mean;
        ss += d * d;
      }
      // Population-SD convention (divisor n).
      f.sd = std::sqrt(ss / static_cast<double>(rows.size()));
      if (f.sd == 0.0) {
        f.sd = 1.0;
        f.constant = true;
      }
      tf.numeric.push_back(f);
    } else {
      FittedTransform::CategoricalFeature f;
      f.col = ci;
      const auto vocab = static_cast<Index>(col.labels.size());
      std::vector<Index> counts(static_cast<std::size_t>(vocab), 0);
      for (const Index r : rows) ++counts[static_cast<std::size_t>(col.values(r))];

      f.code_to_slot.assign(static_cast<std::size_t>(vocab), -1);
      Index slot = 0;
      Index first_retained = -1;
      for (Index code = 0; code < vocab; ++code)
        if (counts[static_cast<std::size_t>(code)] >= options.rare_category_min_count) {
          if (first_retained < 0) first_retained = code;
          f.code_to_slot[static_cast<std::size_t>(code)] = slot++;
        }
      f.other_slot = slot++;
      for (Index code = 0; code < vocab; ++code)
        if (counts[static_cast<std::size_t>(code)] < options.rare_category_min_count)
          f.code_to_slot[static_cast<std::size_t>(code)] = f.other_slot;
      f.width = slot;
      if (options.one_hot_drop_reference) {
        // Drop the first retained level; with nothing retained the shared
        // "other" level itself becomes the reference.
        if (first_retained >= 0) {
          f.code_to_slot[static_cast<std::size_t>(first_retained)] = -1;
        } else {
          for (auto& s : f.code_to_slot) s = -1;
          f.other_slot = -1;
        }
        for (auto& s : f.code_to_slot)
          if (s > 0) --s;
        if (f.other_slot > 0) --f.other_slot;
        --f.width;
      }
      tf.categorical.push_back(f);
    }
  }

  Index width = static_cast<Index>(tf.numeric.size());
  for (const auto& f : tf.categorical) width += f.width;
  tf.width = width;

  if (data.outcome_kind() == OutcomeKind::Numeric) {
    tf.log_outcome = options.log_outcome;
    if (options.winsorize_quantiles) {
      const auto [lo_q, hi_q] = *options.winsorize_quantiles;
      if (!(0.0 <= lo_q && lo_q < hi_q && hi_q <= 1.0))
        throw InvalidInputError("preprocess_fit: invalid winsorization quantiles");
      std::vector<double> ys;
      ys.reserve(rows.size());
      for (const Index r : rows) ys.push_back(data.outcome_values()(r));
      std::sort(ys.begin(), ys.end());
      tf.winsorized = true;
      tf.winsor_lo = quantile_sorted(ys, lo_q);
      tf.winsor_hi = quantile_sorted(ys, hi_q);
    }
  }
  return tf;
}

void FittedTransform::feature_row(const Dataset& data, Index row, double* out) const {
  Index at = 0;
  for (const auto& f : numeric) {
    const double v = data.column(f.col).values(row);
    out[at++] = standardize ? (v - f.mean) / f.sd : v;
  }
  for (const auto& f : categorical) {
    for (Index k = 0; k < f.width; ++k) out[at + k] = 0.0;
    const auto code = static_cast<std::size_t>(data.column(f.col).values(row));
    const Index slot =
        code < f.code_to_slot.size() ? f.code_to_slot[code] : f.other_slot;
    if (slot >= 0) out[at + slot] = 1.0;
    at += f.width;
  }
}

Eigen::MatrixXd FittedTransform::features(const Dataset& data,
                                          std::span<const Index> rows) const {
  Eigen::MatrixXd X(static_cast<Index>(rows.size()), width);
  std::vector<double> buf(static_cast<std::size_t>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    feature_row(data, rows[i], buf.data());
    for (Index j = 0; j < width; ++j) X(static_cast<Index>(i), j) = buf[static_cast<std::size_t>(j)];
  }
  return X;
}

double FittedTransform::transform_outcome(double y) const {
  double v = y;
  if (winsorized) v = std::clamp(v, winsor_lo, winsor_hi);
  if (log_outcome) {
    if (v < 0.0)
      throw InvalidInputError("log-outcome training requires non-negative outcomes");
    v = std::log1p(v);
  }
  return v;
}

double FittedTransform::back_transform(double pred) const {
  return log_outcome ? std::expm1(pred) : pred;
}

Eigen::VectorXd FittedTransform::training_outcomes(const Dataset& data,
                                                   std::span<const Index> rows) const {
  Eigen::VectorXd y(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    y(static_cast<Index>(i)) = transform_outcome(data.outcome_values()(rows[i]));
  return y;
}

}  // namespace ess
