#include "ess/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ess/stats.hpp"

namespace ess {

TrainingGrid TrainingGrid::explicit_sizes(std::vector<Index> sizes) {
  TrainingGrid grid;
  grid.sizes = std::move(sizes);
  return grid;
}

TrainingGrid TrainingGrid::geometric(Index lo, Index hi, Index points) {
  if (lo < 1 || hi < lo || points < 1) throw InvalidInputError("bad geometric grid bounds");
  TrainingGrid grid;
  if (points == 1 || lo == hi) {
    grid.sizes.push_back(lo);
    if (hi != lo) grid.sizes.push_back(hi);
    return grid;
  }
  const double ratio = std::log(static_cast<double>(hi) / static_cast<double>(lo)) /
                       static_cast<double>(points - 1);
  for (Index k = 0; k < points; ++k) {
    const auto v = static_cast<Index>(
        std::llround(static_cast<double>(lo) * std::exp(ratio * static_cast<double>(k))));
    if (grid.sizes.empty() || v > grid.sizes.back()) grid.sizes.push_back(v);
  }
  return grid;
}

TrainingGrid TrainingGrid::parse(const std::string& text) {
  TrainingGrid grid;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(token, &used);
    } catch (const std::exception&) {
      throw InvalidInputError("grid entry '" + token + "' is not an integer");
    }
    if (used != token.size()) throw InvalidInputError("grid entry '" + token + "' is not an integer");
    grid.sizes.push_back(static_cast<Index>(v));
  }
  return grid;
}

void TrainingGrid::validate(Index n_rows) const {
  if (sizes.empty()) throw InvalidInputError("training grid is empty");
  Index prev = 0;
  for (const Index s : sizes) {
    if (s < 1) throw InvalidInputError("training size " + std::to_string(s) + " is below 1");
    if (s <= prev) throw InvalidInputError("training grid must be strictly increasing");
    prev = s;
  }
  if (2 * sizes.back() > n_rows)
    throw InvalidInputError("largest training size " + std::to_string(sizes.back()) +
                            " exceeds n/2 for n=" + std::to_string(n_rows));
}

Decision studentized_decision(double diff, double sigma2, Index n_effective, double alpha) {
  if (sigma2 < 0.0) throw InvalidInputError("negative variance");
  if (n_effective < 1) throw InvalidInputError("empty sample");
  Decision d;
  const double se = std::sqrt(sigma2 / static_cast<double>(n_effective));
  if (se == 0.0) {
    d.degenerate_variance = true;
    d.lb = diff;
    d.t_stat = diff > 0.0   ? std::numeric_limits<double>::infinity()
               : diff < 0.0 ? -std::numeric_limits<double>::infinity()
                            : 0.0;
  } else {
    const double z = normal_quantile(1.0 - alpha);
    d.lb = diff - z * se;
    d.t_stat = diff / se;
  }
  d.rejected = d.lb > 0.0;
  return d;
}

StepResult test_step(const Dataset& data, const Learner& learner, Index train_size,
                     const LossFunction& loss, const StepOptions& opts) {
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0))
    throw InvalidInputError("alpha must lie strictly between 0 and 1");
  CvOptions cv_opts;
  cv_opts.seed = opts.seed;
  const CvRun run = run_block_cv(data, learner, train_size, loss, cv_opts, true);

  StepResult step;
  step.train_size = train_size;
  step.blocks = run.partition.blocks;
  step.n_effective = run.learner_cv.n_effective();
  step.e_cv = run.learner_cv.e_cv;
  step.e_rule = run.rule_risk_kept;
  step.diff = run.difference_cv->e_cv;
  step.regime = select_regime(train_size, opts.regime_threshold);
  step.variance = variance_of_difference(run, opts.variance_mode, step.regime);
  step.learner_variance = variance_for_regime(run.learner_cv, step.regime);
  step.sigma_hat = std::sqrt(step.variance.sigma2);
  step.se = step.sigma_hat / std::sqrt(static_cast<double>(step.n_effective));
  step.risk_se =
      std::sqrt(step.learner_variance.sigma2 / static_cast<double>(step.n_effective));
  step.variance_clipped = step.variance.clipped;
  step.hyperparams = run.tuned.describe();

  const Decision d =
      studentized_decision(step.diff, step.variance.sigma2, step.n_effective, opts.alpha);
  step.t_stat = d.t_stat;
  step.lb = d.lb;
  step.rejected = d.rejected;
  step.degenerate_variance = d.degenerate_variance;
  return step;
}

SequentialResult sequential_ess(const Dataset& data, const Learner& learner,
                                const TrainingGrid& grid, const LossFunction& loss,
                                const StepOptions& opts, bool curve_mode) {
  grid.validate(data.n_rows());
  SequentialResult result;
  result.alpha = opts.alpha;
  for (std::size_t k = 0; k < grid.sizes.size(); ++k) {
    StepResult step;
    try {
      step = test_step(data, learner, grid.sizes[k], loss, opts);
    } catch (const Error& e) {
      result.error = e.what();
      break;
    }
    result.steps.push_back(step);
    if (!step.rejected && result.stop_index < 0) {
      result.stop_index = static_cast<Index>(k);
      if (!curve_mode) break;
    }
  }
  if (result.error && result.stop_index < 0) {
    result.exhausted = false;
    result.n_hat = -1;
    return result;
  }
  if (result.stop_index < 0) {
    result.exhausted = true;
    result.n_hat = grid.sizes.back() + 1;
  } else if (result.stop_index == 0) {
    result.n_hat = 1;
  } else {
    result.n_hat = grid.sizes[static_cast<std::size_t>(result.stop_index - 1)] + 1;
  }
  return result;
}

Index plugin_ess(const std::vector<StepResult>& steps) {
  for (const StepResult& s : steps)
    if (s.e_cv <= s.e_rule) return s.train_size;
  return -1;
}

MonotonicityReport check_monotonicity(const std::vector<StepResult>& steps) {
  MonotonicityReport report;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const double rise = steps[k].e_cv - steps[k - 1].e_cv;
    if (rise <= 0.0) continue;
    RiskIncrease inc;
    inc.from = steps[k - 1].train_size;
    inc.to = steps[k].train_size;
    inc.delta = rise;
    inc.combined_se = std::sqrt(steps[k].risk_se * steps[k].risk_se +
                                steps[k - 1].risk_se * steps[k - 1].risk_se);
    inc.within_noise = rise < 2.0 * inc.combined_se;
    if (!inc.within_noise) report.monotone_within_noise = false;
    report.increases.push_back(inc);
  }
  return report;
}

bool duality_holds(const std::vector<StepResult>& steps) {
  return std::all_of(steps.begin(), steps.end(),
                     [](const StepResult& s) { return s.rejected == (s.lb > 0.0); });
}

}  // namespace ess
