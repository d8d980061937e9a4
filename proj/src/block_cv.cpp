#include "ess/block_cv.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ess/rng.hpp"

namespace ess {

namespace {

constexpr std::uint64_t kTagPermutation = 0x7065726dULL;

void check_sizes(Index n, Index train_size) {
  if (train_size < 1) throw InvalidInputError("training size must be at least 1");
  if (2 * train_size > n)
    throw InvalidInputError("training size " + std::to_string(train_size) +
                            " leaves fewer than two blocks for n=" + std::to_string(n));
}

}  // namespace

std::uint64_t permutation_seed(std::uint64_t run_seed) {
  return derive_seed(run_seed, kTagPermutation);
}

std::uint64_t tuning_seed(std::uint64_t run_seed, Index train_size) {
  return derive_seed(run_seed, static_cast<std::uint64_t>(train_size));
}

std::uint64_t block_train_seed(std::uint64_t run_seed, Index train_size, Index block) {
  return derive_seed(run_seed, static_cast<std::uint64_t>(train_size),
                     static_cast<std::uint64_t>(block));
}

BlockPartition partition_blocks(Index n, Index train_size, std::uint64_t seed) {
  check_sizes(n, train_size);
  Rng rng(permutation_seed(seed));
  return partition_with_order(train_size, rng.permutation(n));
}

BlockPartition partition_with_order(Index train_size, std::vector<Index> order) {
  const auto n = static_cast<Index>(order.size());
  check_sizes(n, train_size);
  std::vector<bool> seen(order.size(), false);
  for (const Index r : order) {
    if (r < 0 || r >= n || seen[static_cast<std::size_t>(r)])
      throw InvalidInputError("row order is not a permutation of 0..n-1");
    seen[static_cast<std::size_t>(r)] = true;
  }
  BlockPartition part;
  part.n = n;
  part.train_size = train_size;
  part.blocks = n / train_size;
  part.discarded = n - part.blocks * train_size;
  part.order = std::move(order);
  return part;
}

CvRun run_block_cv(const Dataset& data, const Learner& learner, Index train_size,
                   const LossFunction& loss, const CvOptions& opts, bool with_difference) {
  data.validate();
  if (!loss.compatible(data.outcome_kind()))
    throw InvalidInputError(std::string(loss.name()) + " loss does not apply to a " +
                            (data.outcome_kind() == OutcomeKind::Categorical ? "categorical"
                                                                             : "numeric") +
                            " outcome");

  CvRun run;
  run.partition = opts.explicit_order
                      ? partition_with_order(train_size, *opts.explicit_order)
                      : partition_blocks(data.n_rows(), train_size, opts.seed);
  const BlockPartition& part = run.partition;
  const Index B = part.blocks;
  const Index kept = part.kept();
  const Index M = kept - train_size;
  const Eigen::VectorXd& y = data.outcome_values();

  const Column* rule_col = nullptr;
  if (const auto idx = data.find_role(ColumnRole::FixedRulePrediction))
    rule_col = &data.column(*idx);
  if (with_difference && rule_col == nullptr)
    throw DataError("difference losses need a fixed-rule prediction column");

  if (rule_col != nullptr) {
    run.rule_losses.resize(kept);
    double total = 0.0;
    for (Index pos = 0; pos < kept; ++pos) {
      const Index r = part.order[static_cast<std::size_t>(pos)];
      const double l = loss(y(r), rule_col->values(r));
      run.rule_losses(pos) = l;
      total += l;
    }
    run.rule_risk_kept = total / static_cast<double>(kept);
  }

  run.tuned = learner.tune(data, train_size, tuning_seed(opts.seed, train_size));

  auto init = [&](BlockCvResult& res) {
    res.train_size = train_size;
    res.blocks = B;
    res.block_risks.setZero(B);
    res.mu_hat.setZero(kept);
    res.m_hat.setZero(B);
    if (opts.keep_loss_matrix)
      res.loss_matrix.emplace(
          Eigen::MatrixXd::Constant(B, kept, std::numeric_limits<double>::quiet_NaN()));
  };
  init(run.learner_cv);
  if (with_difference) init(run.difference_cv.emplace());

  std::vector<Index> eval_rows(static_cast<std::size_t>(M));
  Eigen::VectorXd preds(M);
  for (Index b = 0; b < B; ++b) {
    const auto rule = learner.train(data, part.block_rows(b), run.tuned,
                                    block_train_seed(opts.seed, train_size, b));
    const Index lo = b * train_size;
    const Index hi = lo + train_size;
    Index k = 0;
    for (Index pos = 0; pos < kept; ++pos) {
      if (pos >= lo && pos < hi) continue;
      eval_rows[static_cast<std::size_t>(k++)] = part.order[static_cast<std::size_t>(pos)];
    }
    rule->predict_rows(data, eval_rows, preds);

    double sum = 0.0;
    double dsum = 0.0;
    k = 0;
    for (Index pos = 0; pos < kept; ++pos) {
      if (pos >= lo && pos < hi) continue;
      const Index r = part.order[static_cast<std::size_t>(pos)];
      const double l = loss(y(r), preds(k));
      sum += l;
      run.learner_cv.mu_hat(pos) += l;
      if (run.learner_cv.loss_matrix) (*run.learner_cv.loss_matrix)(b, pos) = l;
      if (with_difference) {
        const double d = l - run.rule_losses(pos);
        dsum += d;
        run.difference_cv->mu_hat(pos) += d;
        if (run.difference_cv->loss_matrix) (*run.difference_cv->loss_matrix)(b, pos) = d;
      }
      ++k;
    }
    run.learner_cv.block_risks(b) = sum / static_cast<double>(M);
    if (with_difference) run.difference_cv->block_risks(b) = dsum / static_cast<double>(M);
  }

  auto finish = [&](BlockCvResult& res) {
    double total = 0.0;
    for (Index b = 0; b < B; ++b) total += res.block_risks(b);
    res.e_cv = total / static_cast<double>(B);
    for (Index pos = 0; pos < kept; ++pos) res.mu_hat(pos) /= static_cast<double>(B - 1);
    for (Index b = 0; b < B; ++b) {
      double s = 0.0;
      for (Index pos = b * train_size; pos < (b + 1) * train_size; ++pos) s += res.mu_hat(pos);
      res.m_hat(b) = s / static_cast<double>(train_size);
    }
  };
  finish(run.learner_cv);
  if (with_difference) finish(*run.difference_cv);

  return run;
}

}  // namespace ess
