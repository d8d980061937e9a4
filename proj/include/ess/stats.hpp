#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "ess/types.hpp"

namespace ess {

// Accumulations below run left to right in index order. Summation order is part
// of the contract: results must be bit-reproducible against plain reference loops.

/// Mean with left-to-right accumulation. Accepts any dense Eigen expression.
template <typename Derived>
double mean_ordered(const Eigen::DenseBase<Derived>& x) {
  const Index n = x.size();
  if (n == 0) throw InvalidInputError("mean_ordered: empty input");
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += static_cast<double>(x.derived()(i));
  return s / static_cast<double>(n);
}

/// Sample variance with divisor (n-1), two-pass, ordered accumulation.
template <typename Derived>
double sample_variance(const Eigen::DenseBase<Derived>& x) {
  const Index n = x.size();
  if (n < 2) throw InvalidInputError("sample_variance: need at least 2 values");
  const double m = mean_ordered(x);
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(x.derived()(i)) - m;
    s += d * d;
  }
  return s / static_cast<double>(n - 1);
}

/// Sample covariance with divisor (n-1).
template <typename D1, typename D2>
double sample_covariance(const Eigen::DenseBase<D1>& x, const Eigen::DenseBase<D2>& y) {
  const Index n = x.size();
  if (n != y.size()) throw InvalidInputError("sample_covariance: length mismatch");
  if (n < 2) throw InvalidInputError("sample_covariance: need at least 2 values");
  const double mx = mean_ordered(x);
  const double my = mean_ordered(y);
  double s = 0.0;
  for (Index i = 0; i < n; ++i)
    s += (static_cast<double>(x.derived()(i)) - mx) * (static_cast<double>(y.derived()(i)) - my);
  return s / static_cast<double>(n - 1);
}

/// Quantile of a sorted sample, linear interpolation between order statistics
/// (the common "type 7" convention).
double quantile_sorted(std::span<const double> sorted, double q);

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile, accurate to near machine precision.
double normal_quantile(double p);

/// Kolmogorov-Smirnov distance between a sample and the standard normal.
double ks_distance_normal(std::vector<double> sample);

/// Monte Carlo standard error of a proportion estimate.
inline double proportion_mc_se(double p, Index reps) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

}  // namespace ess
