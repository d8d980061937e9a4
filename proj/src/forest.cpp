#include <algorithm>
#include <cmath>
#include <numeric>

#include "ess/models.hpp"
#include "ess/rng.hpp"

namespace ess {

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const ForestConfig& cfg;
  Rng& rng;
  std::vector<Eigen::Index> feature_pool;
  std::vector<std::pair<double, double>> sorted;  // (feature value, target)
  std::vector<double> class_left;                 // classification split scan

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0;  // impurity decrease proxy; larger is better
  };

  double leaf_value(const std::vector<Index>& rows) const {
    if (cfg.classification) {
      std::vector<Index> counts(static_cast<std::size_t>(cfg.n_classes), 0);
      for (const Index r : rows) ++counts[static_cast<std::size_t>(y(r))];
      Index best = 0;
      for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<Index>(c);
      return static_cast<double>(best);  // ties keep the smallest code
    }
    double s = 0.0;
    for (const Index r : rows) s += y(r);
    return s / static_cast<double>(rows.size());
  }

  bool pure(const std::vector<Index>& rows) const {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (y(rows[i]) != y(rows[0])) return false;
    return true;
  }

  // Best split on one feature; score is the decrease-relevant sum that both
  // criteria maximize: sum s_side^2 / n_side (regression) or
  // sum_c count_side[c]^2 / n_side (Gini).
  void scan_feature(Eigen::Index feature, const std::vector<Index>& rows, Split& best) {
    sorted.clear();
    for (const Index r : rows) sorted.emplace_back(X(r, feature), y(r));
    std::sort(sorted.begin(), sorted.end());
    const Index m = static_cast<Index>(sorted.size());

    if (cfg.classification) {
      std::vector<double> total(static_cast<std::size_t>(cfg.n_classes), 0.0);
      for (const auto& [v, t] : sorted) total[static_cast<std::size_t>(t)] += 1.0;
      class_left.assign(static_cast<std::size_t>(cfg.n_classes), 0.0);
      for (Index i = 0; i + 1 < m; ++i) {
        class_left[static_cast<std::size_t>(sorted[static_cast<std::size_t>(i)].second)] += 1.0;
        const Index nl = i + 1, nr = m - nl;
        if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
        if (sorted[static_cast<std::size_t>(i)].first ==
            sorted[static_cast<std::size_t>(i + 1)].first)
          continue;
        double sl = 0.0, sr = 0.0;
        for (std::size_t c = 0; c < class_left.size(); ++c) {
          sl += class_left[c] * class_left[c];
          const double rc = total[c] - class_left[c];
          sr += rc * rc;
        }
        const double score = sl / static_cast<double>(nl) + sr / static_cast<double>(nr);
        if (score > best.score) {
          best.score = score;
          best.feature = static_cast<int>(feature);
          best.threshold = 0.5 * (sorted[static_cast<std::size_t>(i)].first +
                                  sorted[static_cast<std::size_t>(i + 1)].first);
        }
      }
    } else {
      double total = 0.0;
      for (const auto& [v, t] : sorted) total += t;
      double left = 0.0;
      for (Index i = 0; i + 1 < m; ++i) {
        left += sorted[static_cast<std::size_t>(i)].second;
        const Index nl = i + 1, nr = m - nl;
        if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
        if (sorted[static_cast<std::size_t>(i)].first ==
            sorted[static_cast<std::size_t>(i + 1)].first)
          continue;
        const double right = total - left;
        const double score = left * left / static_cast<double>(nl) +
                             right * right / static_cast<double>(nr);
        if (score > best.score) {
          best.score = score;
          best.feature = static_cast<int>(feature);
          best.threshold = 0.5 * (sorted[static_cast<std::size_t>(i)].first +
                                  sorted[static_cast<std::size_t>(i + 1)].first);
        }
      }
    }
  }

  Split best_split(const std::vector<Index>& rows) {
    Split best;
    const Index p = X.cols();
    const Index mtry = std::min(cfg.mtry, p);
    // Feature subsample without replacement, deterministic from the tree RNG.
    feature_pool.resize(static_cast<std::size_t>(p));
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    for (Index i = 0; i < mtry; ++i) {
      const Index j = i + rng.uniform_index(p - i);
      std::swap(feature_pool[static_cast<std::size_t>(i)],
                feature_pool[static_cast<std::size_t>(j)]);
      scan_feature(feature_pool[static_cast<std::size_t>(i)], rows, best);
    }
    // The score must beat the unsplit node to count as an improvement.
    if (best.feature >= 0) {
      double parent;
      if (cfg.classification) {
        std::vector<double> counts(static_cast<std::size_t>(cfg.n_classes), 0.0);
        for (const Index r : rows) counts[static_cast<std::size_t>(y(r))] += 1.0;
        double s = 0.0;
        for (const double c : counts) s += c * c;
        parent = s / static_cast<double>(rows.size());
      } else {
        double s = 0.0;
        for (const Index r : rows) s += y(r);
        parent = s * s / static_cast<double>(rows.size());
      }
      if (best.score <= parent) best.feature = -1;
    }
    return best;
  }
};

}  // namespace

Forest Forest::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ForestConfig cfg,
                   std::uint64_t seed) {
  const Index n = X.rows();
  if (n == 0) throw InvalidInputError("Forest::fit: empty training set");
  if (cfg.classification && cfg.n_classes < 1)
    throw InvalidInputError("Forest::fit: classification needs n_classes");
  if (cfg.mtry == 0) {
    const Index p = X.cols();
    cfg.mtry = cfg.classification
                   ? std::max<Index>(1, static_cast<Index>(std::floor(std::sqrt(p))))
                   : std::max<Index>(1, p / 3);
    if (p == 0) cfg.mtry = 0;
  }

  Forest f;
  f.cfg_ = cfg;
  f.trees_.reserve(static_cast<std::size_t>(cfg.n_trees));

  struct Frame {
    std::vector<Index> rows;
    Index node;
    int depth;
  };

  for (Index t = 0; t < cfg.n_trees; ++t) {
    Rng rng(derive_seed(seed, 0x7265657345ULL, static_cast<std::uint64_t>(t)));
    std::vector<Index> bootstrap(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) bootstrap[static_cast<std::size_t>(i)] = rng.uniform_index(n);

    TreeBuilder builder{X, y, f.cfg_, rng, {}, {}, {}};
    std::vector<Node> tree;
    std::vector<Frame> stack;
    tree.push_back(Node{});
    stack.push_back(Frame{std::move(bootstrap), 0, 0});

    while (!stack.empty()) {
      Frame fr = std::move(stack.back());
      stack.pop_back();
      Node& node = tree[static_cast<std::size_t>(fr.node)];
      const bool depth_capped = cfg.max_depth >= 0 && fr.depth >= cfg.max_depth;
      if (depth_capped || static_cast<Index>(fr.rows.size()) < 2 * cfg.min_leaf ||
          fr.rows.size() < 2 || builder.pure(fr.rows) || cfg.mtry == 0) {
        node.value = builder.leaf_value(fr.rows);
        continue;
      }
      const TreeBuilder::Split split = builder.best_split(fr.rows);
      if (split.feature < 0) {
        node.value = builder.leaf_value(fr.rows);
        continue;
      }
      std::vector<Index> left_rows, right_rows;
      for (const Index r : fr.rows)
        (X(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = static_cast<Index>(tree.size());
      node.right = node.left + 1;
      tree.push_back(Node{});
      tree.push_back(Node{});
      const Index left_id = tree[static_cast<std::size_t>(fr.node)].left;
      const Index right_id = tree[static_cast<std::size_t>(fr.node)].right;
      stack.push_back(Frame{std::move(right_rows), right_id, fr.depth + 1});
      stack.push_back(Frame{std::move(left_rows), left_id, fr.depth + 1});
    }
    f.trees_.push_back(std::move(tree));
  }
  return f;
}

double Forest::predict(const double* x) const {
  if (cfg_.classification) {
    std::vector<Index> votes(static_cast<std::size_t>(cfg_.n_classes), 0);
    for (const auto& tree : trees_) {
      Index node = 0;
      while (tree[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = tree[static_cast<std::size_t>(node)];
        node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
      }
      ++votes[static_cast<std::size_t>(tree[static_cast<std::size_t>(node)].value)];
    }
    Index best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
      if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<Index>(c);
    return static_cast<double>(best);
  }
  double s = 0.0;
  for (const auto& tree : trees_) {
    Index node = 0;
    while (tree[static_cast<std::size_t>(node)].feature >= 0) {
      const auto& nd = tree[static_cast<std::size_t>(node)];
      node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    s += tree[static_cast<std::size_t>(node)].value;
  }
  return s / static_cast<double>(trees_.size());
}

double KnnModel::predict(const double* x) const {
  const Index n = X.rows();
  const Index kk = std::min(k, n);
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double d = 0.0;
    for (Index j = 0; j < X.cols(); ++j) {
      const double diff = X(i, j) - x[j];
      d += diff * diff;
    }
    dist[static_cast<std::size_t>(i)] = {d, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
  if (classification) {
    std::vector<Index> votes(static_cast<std::size_t>(n_classes), 0);
    for (Index i = 0; i < kk; ++i)
      ++votes[static_cast<std::size_t>(y(dist[static_cast<std::size_t>(i)].second))];
    Index best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
      if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<Index>(c);
    return static_cast<double>(best);
  }
  double s = 0.0;
  for (Index i = 0; i < kk; ++i) s += y(dist[static_cast<std::size_t>(i)].second);
  return s / static_cast<double>(kk);
}

}  // namespace ess
