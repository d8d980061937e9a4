#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ess/dataset.hpp"
#include "ess/learner.hpp"
#include "ess/loss.hpp"
#include "ess/types.hpp"

namespace ess {

/// Partition of a dataset into B = floor(n / N) disjoint training blocks of
/// exactly N rows each. One seeded permutation of all n rows is drawn once;
/// block b occupies permuted positions [b*N, (b+1)*N). Rows beyond B*N are
/// discarded from both training and evaluation. The permutation depends only
/// on (n, seed), so different block sizes reslice the same row order.
struct BlockPartition {
  Index n = 0;
  Index train_size = 0;
  Index blocks = 0;
  Index discarded = 0;
  std::vector<Index> order;

  Index kept() const { return blocks * train_size; }
  std::span<const Index> block_rows(Index b) const {
    return std::span<const Index>(order).subspan(static_cast<std::size_t>(b * train_size),
                                                 static_cast<std::size_t>(train_size));
  }
};

BlockPartition partition_blocks(Index n, Index train_size, std::uint64_t seed);
BlockPartition partition_with_order(Index train_size, std::vector<Index> order);

std::uint64_t permutation_seed(std::uint64_t run_seed);
std::uint64_t tuning_seed(std::uint64_t run_seed, Index train_size);
std::uint64_t block_train_seed(std::uint64_t run_seed, Index train_size, Index block);

/// Cross-validated losses for one training size. Kept rows are indexed by
/// permuted position (0..B*N-1) throughout; mu_hat(i) averages the losses of
/// row i under the B-1 rules whose training block excludes it.
struct BlockCvResult {
  Index train_size = 0;
  Index blocks = 0;
  double e_cv = 0.0;
  Eigen::VectorXd block_risks;
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd m_hat;
  std::optional<Eigen::MatrixXd> loss_matrix;

  Index n_effective() const { return blocks * train_size; }
};

struct CvOptions {
  std::uint64_t seed = 0;
  bool keep_loss_matrix = false;
  const std::vector<Index>* explicit_order = nullptr;
};

struct CvRun {
  BlockPartition partition;
  BlockCvResult learner_cv;
  std::optional<BlockCvResult> difference_cv;
  double rule_risk_kept = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd rule_losses;
  Hyperparams tuned;
};

/// Trains one rule per block and scores every rule on the complement of its
/// own block. All reductions run in a fixed left-to-right order so results
/// are exactly reproducible. When with_difference is set the dataset must
/// carry a fixed-rule prediction column; the pointwise loss gap between the
/// learner and that rule is aggregated through the same paths.
CvRun run_block_cv(const Dataset& data, const Learner& learner, Index train_size,
                   const LossFunction& loss, const CvOptions& opts, bool with_difference);

}  // namespace ess
