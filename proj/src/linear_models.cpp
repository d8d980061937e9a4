#include <algorithm>
#include <cmath>
#include <sstream>

#include "ess/models.hpp"

namespace ess {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

struct Centered {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::RowVectorXd x_mean;
  double y_mean = 0.0;
};

Centered center(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Centered c;
  c.x_mean = X.colwise().mean();
  c.X = X.rowwise() - c.x_mean;
  c.y_mean = y.mean();
  c.y = y.array() - c.y_mean;
  return c;
}

}  // namespace

Index solver_iteration_budget(Index n, Index p) {
  const double passes = 1e8 / (static_cast<double>(n) * static_cast<double>(p) + 1.0);
  return std::max<Index>(100000, static_cast<Index>(passes));
}

double lasso_max_penalty(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.cols() == 0 || X.rows() == 0) return 0.0;
  const Centered c = center(X, y);
  const double n = static_cast<double>(X.rows());
  return (c.X.transpose() * c.y).cwiseAbs().maxCoeff() / n;
}

std::vector<double> lasso_path(double lambda_max, int points, double decades) {
  std::vector<double> path;
  if (lambda_max <= 0.0 || points < 1) return path;
  path.reserve(static_cast<std::size_t>(points));
  if (points == 1) {
    path.push_back(lambda_max);
    return path;
  }
  const double step = decades / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) path.push_back(lambda_max * std::pow(10.0, -step * i));
  return path;
}

LinearModel fit_lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                         double tol, Index max_sweeps, const Eigen::VectorXd* warm) {
  if (lambda < 0.0) throw InvalidInputError("fit_lasso_cd: negative penalty");
  const Index n = X.rows();
  const Index p = X.cols();
  LinearModel model;
  model.coef = Eigen::VectorXd::Zero(p);
  if (n == 0) throw InvalidInputError("fit_lasso_cd: empty training set");
  if (p == 0) {
    model.intercept = y.mean();
    return model;
  }

  const Centered c = center(X, y);
  const double dn = static_cast<double>(n);
  Eigen::VectorXd col_ss(p);
  for (Index j = 0; j < p; ++j) col_ss(j) = c.X.col(j).squaredNorm() / dn;

  Eigen::VectorXd b = (warm && warm->size() == p) ? *warm : Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = c.y - c.X * b;

  // Near-collinear columns (common in tiny CV folds) contract the coefficient
  // error by only rho^2 per sweep, so the delta criterion alone can need far
  // more sweeps than a well-conditioned design while the fit itself stopped
  // improving long ago. The objective is monotone, so two consecutive sweeps
  // pinned at its floating-point floor also count as converged.
  const auto objective = [&] { return r.squaredNorm() / (2.0 * dn) + lambda * b.lpNorm<1>(); };
  const double obj_scale = c.y.squaredNorm() / (2.0 * dn);
  double obj_prev = objective();
  Index flat = 0;
  bool converged = false;
  for (Index sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (col_ss(j) == 0.0) {
        if (b(j) != 0.0) {
          r += c.X.col(j) * b(j);
          b(j) = 0.0;
        }
        continue;
      }
      const double rho = c.X.col(j).dot(r) / dn + col_ss(j) * b(j);
      const double bj = soft_threshold(rho, lambda) / col_ss(j);
      const double delta = bj - b(j);
      if (delta != 0.0) {
        r -= c.X.col(j) * delta;
        b(j) = bj;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta <= tol) {
      converged = true;
      break;
    }
    const double obj = objective();
    if (obj_prev - obj <= 1e-15 * (obj + obj_scale)) {
      if (++flat >= 2) {
        converged = true;
        break;
      }
    } else {
      flat = 0;
    }
    obj_prev = obj;
  }
  if (!converged) {
    std::ostringstream os;
    os << "lasso coordinate descent did not converge: lambda=" << lambda << " n=" << n
       << " p=" << p << " sweeps=" << max_sweeps << " tol=" << tol;
    throw NumericError(os.str());
  }

  model.coef = b;
  model.intercept = c.y_mean - c.x_mean * b;
  return model;
}

double lasso_kkt_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const LinearModel& model, double lambda) {
  if (X.cols() == 0) return 0.0;
  const Centered c = center(X, y);
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd r = c.y - c.X * model.coef;
  double worst = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    const double g = c.X.col(j).dot(r) / n;
    if (model.coef(j) == 0.0)
      worst = std::max(worst, std::abs(g) - lambda);
    else
      worst = std::max(worst, std::abs(g - lambda * (model.coef(j) > 0 ? 1.0 : -1.0)));
  }
  return std::max(worst, 0.0);
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const LinearModel& model, double lambda) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd r =
      y - Eigen::VectorXd::Constant(X.rows(), model.intercept) - X * model.coef;
  return r.squaredNorm() / (2.0 * n) + lambda * model.coef.template lpNorm<1>();
}

LinearModel fit_logit_l1(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01, double lambda,
                         double tol, Index max_iter) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (n == 0) throw InvalidInputError("fit_logit_l1: empty training set");
  const double dn = static_cast<double>(n);

  // Lipschitz bound for the logistic gradient with an intercept column of ones.
  const double lip = (X.squaredNorm() + dn) / (4.0 * dn);
  const double step = 1.0 / std::max(lip, 1e-12);

  LinearModel model;
  model.coef = Eigen::VectorXd::Zero(p);
  model.intercept = 0.0;

  // Same termination backstops as the lasso solver: the proximal step with
  // 1/L sizing is monotone in the penalized deviance, so an objective pinned
  // at its floating-point floor for two iterations counts as converged.
  const auto objective = [&](const Eigen::VectorXd& z) {
    double nll = 0.0;
    for (Index i = 0; i < n; ++i)
      nll += std::max(z(i), 0.0) + std::log1p(std::exp(-std::abs(z(i)))) - y01(i) * z(i);
    return nll / dn + lambda * model.coef.lpNorm<1>();
  };
  const double obj_scale = std::log(2.0);

  Eigen::VectorXd z(n), prob(n), grad(p);
  double obj_prev = objective(Eigen::VectorXd::Zero(n));
  Index flat = 0;
  bool converged = false;
  for (Index iter = 0; iter < max_iter; ++iter) {
    z = Eigen::VectorXd::Constant(n, model.intercept) + X * model.coef;
    for (Index i = 0; i < n; ++i) prob(i) = 1.0 / (1.0 + std::exp(-z(i)));
    grad = X.transpose() * (prob - y01) / dn;
    const double grad0 = (prob - y01).sum() / dn;

    double max_delta = std::abs(step * grad0);
    model.intercept -= step * grad0;
    for (Index j = 0; j < p; ++j) {
      const double bj = soft_threshold(model.coef(j) - step * grad(j), step * lambda);
      max_delta = std::max(max_delta, std::abs(bj - model.coef(j)));
      model.coef(j) = bj;
    }
    if (max_delta <= tol) {
      converged = true;
      break;
    }
    const double obj = objective(Eigen::VectorXd::Constant(n, model.intercept) + X * model.coef);
    if (obj_prev - obj <= 1e-15 * (obj + obj_scale)) {
      if (++flat >= 2) {
        converged = true;
        break;
      }
    } else {
      flat = 0;
    }
    obj_prev = obj;
  }
  if (!converged) {
    std::ostringstream os;
    os << "logit_l1 proximal gradient did not converge: lambda=" << lambda << " n=" << n
       << " p=" << p << " iterations=" << max_iter << " tol=" << tol;
    throw NumericError(os.str());
  }
  return model;
}

}  // namespace ess
