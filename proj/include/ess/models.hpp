#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "ess/types.hpp"

namespace ess {

/// Linear predictor on the feature scale produced by a FittedTransform.
struct LinearModel {
  Eigen::VectorXd coef;
  double intercept = 0.0;

  double predict(const double* x) const {
    double z = intercept;
    for (Index j = 0; j < coef.size(); ++j) z += coef(j) * x[j];
    return z;
  }
};

/// Smallest penalty for which the lasso solution is all-zero:
/// max_j |X_c' y_c| / n on centered data.
double lasso_max_penalty(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Iteration budget that grows for small designs, where near-collinear
/// columns slow first-order solvers even though each pass is cheap.
Index solver_iteration_budget(Index n, Index p);

/// Geometric penalty path from lambda_max down `decades` orders of magnitude.
std::vector<double> lasso_path(double lambda_max, int points, double decades);

/// Coordinate descent for (1/2n)||y - b0 - X b||^2 + lambda ||b||_1 with an
/// unpenalized intercept. `warm` seeds the coefficients (penalty-path reuse).
LinearModel fit_lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                         double tol = 1e-10, Index max_sweeps = 100000,
                         const Eigen::VectorXd* warm = nullptr);

/// Largest KKT violation of a candidate solution; optimality means <= tol.
double lasso_kkt_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const LinearModel& model, double lambda);

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const LinearModel& model, double lambda);

/// L1-penalized logistic regression via proximal gradient descent on
/// (1/n) sum log(1+exp(z)) - y z + lambda ||b||_1, intercept unpenalized.
/// Throws NumericError with diagnostics if the iteration cap is hit.
LinearModel fit_logit_l1(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01, double lambda,
                         double tol = 1e-8, Index max_iter = 200000);

struct ForestConfig {
  Index n_trees = 300;
  int max_depth = -1;  // -1 = unbounded
  Index min_leaf = 1;
  Index mtry = 0;  // 0 = auto: p/3 for regression, sqrt(p) for classification
  bool classification = false;
  Index n_classes = 0;
};

/// Random forest: bootstrap resampling per tree, feature subsampling per split,
/// exhaustive threshold search over midpoints. Fully determined by the seed.
class Forest {
 public:
  static Forest fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ForestConfig cfg,
                    std::uint64_t seed);
  double predict(const double* x) const;
  const ForestConfig& config() const { return cfg_; }

 private:
  struct Node {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    Index left = -1, right = -1;
    double value = 0.0;
  };
  std::vector<std::vector<Node>> trees_;
  ForestConfig cfg_;
};

struct KnnModel {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Index k = 5;
  bool classification = false;
  Index n_classes = 0;

  double predict(const double* x) const;
};

}  // namespace ess
