#include "ess/learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ess/loss.hpp"
#include "ess/models.hpp"
#include "ess/rng.hpp"

namespace ess {

const char* family_name(LearnerFamily family) {
  switch (family) {
    case LearnerFamily::BaselineMean: return "baseline_mean";
    case LearnerFamily::BaselineMajority: return "baseline_majority";
    case LearnerFamily::Lasso: return "lasso";
    case LearnerFamily::LogitL1: return "logit_l1";
    case LearnerFamily::RandomForest: return "random_forest";
    case LearnerFamily::Knn: return "knn";
  }
  return "unknown";
}

const char* family_display_name(LearnerFamily family) {
  switch (family) {
    case LearnerFamily::BaselineMean: return "Mean";
    case LearnerFamily::BaselineMajority: return "Majority";
    case LearnerFamily::Lasso: return "Lasso";
    case LearnerFamily::LogitL1: return "Logit L1";
    case LearnerFamily::RandomForest: return "RF";
    case LearnerFamily::Knn: return "kNN";
  }
  return "unknown";
}

LearnerFamily parse_family(const std::string& token) {
  for (const LearnerFamily f :
       {LearnerFamily::BaselineMean, LearnerFamily::BaselineMajority, LearnerFamily::Lasso,
        LearnerFamily::LogitL1, LearnerFamily::RandomForest, LearnerFamily::Knn})
    if (token == family_name(f)) return f;
  if (token == "mean") return LearnerFamily::BaselineMean;
  if (token == "majority") return LearnerFamily::BaselineMajority;
  if (token == "rf") return LearnerFamily::RandomForest;
  throw InvalidInputError("unknown learner family '" + token + "'");
}

std::string Hyperparams::describe() const {
  std::ostringstream os;
  bool any = false;
  auto sep = [&] { if (any) os << ","; any = true; };
  if (lasso_lambda) { sep(); os << "lambda=" << *lasso_lambda; }
  if (logit_c) { sep(); os << "C=" << *logit_c; }
  if (forest_depth) { sep(); os << "depth=" << (*forest_depth < 0 ? std::string("none") : std::to_string(*forest_depth)); }
  if (forest_min_leaf) { sep(); os << "min_leaf=" << *forest_min_leaf; }
  if (knn_k) { sep(); os << "k=" << *knn_k; }
  if (majority_fallback) { sep(); os << "majority_fallback"; }
  if (tune_on_block) { sep(); os << "tune_on_block"; }
  if (!any) os << "default";
  return os.str();
}

namespace {

constexpr std::uint64_t kTagSubset = 0x73756273ULL;
constexpr std::uint64_t kTagFolds = 0x666f6c64ULL;
constexpr std::uint64_t kTagFit = 0x666974ULL;
constexpr std::uint64_t kTagBlockTune = 0x6274756eULL;

class ConstantRule final : public PredictionRule {
 public:
  explicit ConstantRule(double value) : value_(value) {}
  void predict_rows(const Dataset&, std::span<const Index> rows,
                    Eigen::Ref<Eigen::VectorXd> out) const override {
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = value_;
  }

 private:
  double value_;
};

class LinearRegressionRule final : public PredictionRule {
 public:
  LinearRegressionRule(FittedTransform tf, LinearModel model)
      : tf_(std::move(tf)), model_(std::move(model)) {}
  void predict_rows(const Dataset& data, std::span<const Index> rows,
                    Eigen::Ref<Eigen::VectorXd> out) const override {
    std::vector<double> buf(static_cast<std::size_t>(tf_.width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      tf_.feature_row(data, rows[i], buf.data());
      out(static_cast<Index>(i)) = tf_.back_transform(model_.predict(buf.data()));
    }
  }

 private:
  FittedTransform tf_;
  LinearModel model_;
};

class LogitRule final : public PredictionRule {
 public:
  LogitRule(FittedTransform tf, LinearModel model, double code0, double code1)
      : tf_(std::move(tf)), model_(std::move(model)), code0_(code0), code1_(code1) {}
  void predict_rows(const Dataset& data, std::span<const Index> rows,
                    Eigen::Ref<Eigen::VectorXd> out) const override {
    std::vector<double> buf(static_cast<std::size_t>(tf_.width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      tf_.feature_row(data, rows[i], buf.data());
      out(static_cast<Index>(i)) = model_.predict(buf.data()) >= 0.0 ? code1_ : code0_;
    }
  }

 private:
  FittedTransform tf_;
  LinearModel model_;
  double code0_, code1_;
};

class ForestRule final : public PredictionRule {
 public:
  ForestRule(FittedTransform tf, Forest forest) : tf_(std::move(tf)), forest_(std::move(forest)) {}
  void predict_rows(const Dataset& data, std::span<const Index> rows,
                    Eigen::Ref<Eigen::VectorXd> out) const override {
    std::vector<double> buf(static_cast<std::size_t>(tf_.width));
    const bool cls = forest_.config().classification;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      tf_.feature_row(data, rows[i], buf.data());
      const double pred = forest_.predict(buf.data());
      out(static_cast<Index>(i)) = cls ? pred : tf_.back_transform(pred);
    }
  }

 private:
  FittedTransform tf_;
  Forest forest_;
};

class KnnRule final : public PredictionRule {
 public:
  KnnRule(FittedTransform tf, KnnModel model) : tf_(std::move(tf)), model_(std::move(model)) {}
  void predict_rows(const Dataset& data, std::span<const Index> rows,
                    Eigen::Ref<Eigen::VectorXd> out) const override {
    std::vector<double> buf(static_cast<std::size_t>(tf_.width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      tf_.feature_row(data, rows[i], buf.data());
      const double pred = model_.predict(buf.data());
      out(static_cast<Index>(i)) = model_.classification ? pred : tf_.back_transform(pred);
    }
  }

 private:
  FittedTransform tf_;
  KnnModel model_;
};

bool is_classifier(LearnerFamily family) {
  return family == LearnerFamily::BaselineMajority || family == LearnerFamily::LogitL1;
}

bool is_regressor(LearnerFamily family) {
  return family == LearnerFamily::BaselineMean || family == LearnerFamily::Lasso;
}

/// Majority label code among rows; ties resolve to the smallest code.
double majority_code(const Dataset& data, std::span<const Index> rows) {
  std::vector<Index> counts(data.outcome_labels().size(), 0);
  for (const Index r : rows) ++counts[static_cast<std::size_t>(data.outcome_values()(r))];
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[best]) best = c;
  return static_cast<double>(best);
}

Index distinct_classes(const Dataset& data, std::span<const Index> rows) {
  std::vector<bool> seen(data.outcome_labels().size(), false);
  Index k = 0;
  for (const Index r : rows) {
    const auto code = static_cast<std::size_t>(data.outcome_values()(r));
    if (!seen[code]) {
      seen[code] = true;
      ++k;
    }
  }
  return k;
}

/// Fold assignment by shuffled round robin. Returns fold id per position.
std::vector<int> plain_folds(Index n, int folds, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    fold[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % folds);
  return fold;
}

/// Stratified folds: shuffle within each class, then round robin per class.
std::vector<int> stratified_folds(const Dataset& data, std::span<const Index> rows, int folds,
                                  Rng& rng) {
  std::vector<int> fold(rows.size(), 0);
  std::vector<std::vector<Index>> by_class(data.outcome_labels().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    by_class[static_cast<std::size_t>(data.outcome_values()(rows[i]))].push_back(
        static_cast<Index>(i));
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold[static_cast<std::size_t>(members[i])] = static_cast<int>(i % folds);
  }
  return fold;
}

class FamilyLearner final : public Learner {
 public:
  explicit FamilyLearner(LearnerSpec spec) : spec_(std::move(spec)) {}

  std::string name() const override { return family_name(spec_.family); }
  std::string display_name() const override { return family_display_name(spec_.family); }

  Hyperparams tune(const Dataset& data, Index train_size, std::uint64_t seed) const override {
    validate(data);
    if (train_size < 1 || train_size > data.n_rows())
      throw InvalidInputError("tune: training size outside 1..n");
    if (!spec_.tuning.per_n_subset) {
      Hyperparams hp;
      hp.tune_on_block = true;
      return hp;
    }
    Rng rng(derive_seed(seed, kTagSubset));
    const std::vector<Index> rows = rng.sample_without_replacement(data.n_rows(), train_size);
    return tune_on(data, rows, seed);
  }

  std::unique_ptr<PredictionRule> train(const Dataset& data, std::span<const Index> rows,
                                        const Hyperparams& hp_in,
                                        std::uint64_t seed) const override {
    validate(data);
    if (rows.empty()) throw InvalidInputError("train: empty training block");

    Hyperparams hp = hp_in;
    if (hp.tune_on_block) {
      std::vector<Index> owned(rows.begin(), rows.end());
      hp = tune_on(data, owned, derive_seed(seed, kTagBlockTune));
    }

    std::unique_ptr<PredictionRule> rule;
    const bool categorical = data.outcome_kind() == OutcomeKind::Categorical;
    if (categorical && (hp.majority_fallback || distinct_classes(data, rows) < 2) &&
        spec_.family != LearnerFamily::BaselineMean) {
      rule = std::make_unique<ConstantRule>(majority_code(data, rows));
    } else {
      switch (spec_.family) {
        case LearnerFamily::BaselineMean: rule = train_mean(data, rows); break;
        case LearnerFamily::BaselineMajority:
          rule = std::make_unique<ConstantRule>(majority_code(data, rows));
          break;
        case LearnerFamily::Lasso: rule = train_lasso(data, rows, hp); break;
        case LearnerFamily::LogitL1: rule = train_logit(data, rows, hp); break;
        case LearnerFamily::RandomForest: rule = train_forest(data, rows, hp, seed); break;
        case LearnerFamily::Knn: rule = train_knn(data, rows, hp); break;
      }
    }
    rule->provenance.source = name();
    rule->provenance.hyperparams = hp.describe();
    rule->provenance.seed = seed;
    rule->provenance.trained_on = static_cast<Index>(rows.size());
    return rule;
  }

 private:
  void validate(const Dataset& data) const {
    const bool categorical = data.outcome_kind() == OutcomeKind::Categorical;
    if (categorical && is_regressor(spec_.family))
      throw InvalidInputError(std::string(family_name(spec_.family)) +
                              " requires a numeric outcome");
    if (!categorical && is_classifier(spec_.family))
      throw InvalidInputError(std::string(family_name(spec_.family)) +
                              " requires a categorical outcome");
    if (spec_.family == LearnerFamily::LogitL1 && data.outcome_labels().size() != 2)
      throw InvalidInputError("logit_l1 requires a binary outcome");
  }

  Hyperparams tune_on(const Dataset& data, std::span<const Index> rows,
                      std::uint64_t seed) const {
    Hyperparams hp;
    const bool categorical = data.outcome_kind() == OutcomeKind::Categorical;
    if (categorical && distinct_classes(data, rows) < 2 &&
        spec_.family != LearnerFamily::BaselineMean) {
      hp.majority_fallback = true;
      return hp;
    }
    switch (spec_.family) {
      case LearnerFamily::BaselineMean:
      case LearnerFamily::BaselineMajority: break;
      case LearnerFamily::Knn: hp.knn_k = spec_.tuning.knn_k; break;
      case LearnerFamily::Lasso: tune_lasso(data, rows, seed, hp); break;
      case LearnerFamily::LogitL1: tune_logit(data, rows, seed, hp); break;
      case LearnerFamily::RandomForest: tune_forest(data, rows, seed, hp); break;
    }
    return hp;
  }

  int classification_fold_count(const Dataset& data, std::span<const Index> rows) const {
    std::vector<Index> counts(data.outcome_labels().size(), 0);
    for (const Index r : rows) ++counts[static_cast<std::size_t>(data.outcome_values()(r))];
    Index minority = -1;
    for (const Index c : counts)
      if (c > 0 && (minority < 0 || c < minority)) minority = c;
    return static_cast<int>(
        std::min<Index>(spec_.tuning.classification_folds, minority < 0 ? 0 : minority));
  }

  void tune_lasso(const Dataset& data, std::span<const Index> rows, std::uint64_t seed,
                  Hyperparams& hp) const {
    const FittedTransform tf = preprocess_fit(data, rows, spec_.preprocess);
    const Eigen::MatrixXd X = tf.features(data, rows);
    const Eigen::VectorXd y = tf.training_outcomes(data, rows);
    const double lambda_max = lasso_max_penalty(X, y);
    if (lambda_max <= 0.0) {
      hp.lasso_lambda = 0.0;  // no usable signal; coefficients are zero at any penalty
      return;
    }
    const std::vector<double> path =
        lasso_path(lambda_max, spec_.tuning.path_points, spec_.tuning.path_decades);
    const auto n = static_cast<Index>(rows.size());
    const int folds = static_cast<int>(std::min<Index>(spec_.tuning.lasso_folds, n));
    if (folds < 2) {
      hp.lasso_lambda = lambda_max;  // CV impossible; keep the most regularized fit
      return;
    }
    Rng rng(derive_seed(seed, kTagFolds));
    const std::vector<int> fold = plain_folds(n, folds, rng);

    std::vector<double> sse(path.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
      std::vector<Index> tr, te;
      for (Index i = 0; i < n; ++i)
        (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
      Eigen::MatrixXd Xtr(static_cast<Index>(tr.size()), X.cols());
      Eigen::VectorXd ytr(static_cast<Index>(tr.size()));
      for (std::size_t i = 0; i < tr.size(); ++i) {
        Xtr.row(static_cast<Index>(i)) = X.row(tr[i]);
        ytr(static_cast<Index>(i)) = y(tr[i]);
      }
      Eigen::VectorXd warm = Eigen::VectorXd::Zero(X.cols());
      for (std::size_t li = 0; li < path.size(); ++li) {
        const LinearModel m = fit_lasso_cd(Xtr, ytr, path[li], 1e-10,
                                           solver_iteration_budget(Xtr.rows(), Xtr.cols()),
                                           &warm);
        warm = m.coef;
        for (const Index i : te) {
          double z = m.intercept;
          for (Index j = 0; j < X.cols(); ++j) z += m.coef(j) * X(i, j);
          const double d = z - y(i);
          sse[li] += d * d;
        }
      }
    }
    std::size_t best = 0;
    for (std::size_t li = 1; li < sse.size(); ++li)
      if (sse[li] < sse[best]) best = li;  // ties keep the larger penalty
    hp.lasso_lambda = path[best];
  }

  void tune_logit(const Dataset& data, std::span<const Index> rows, std::uint64_t seed,
                  Hyperparams& hp) const {
    const int folds = classification_fold_count(data, rows);
    if (folds < 2) {
      hp.logit_c = 1.0;  // degenerate tuning subset; library default strength
      return;
    }
    const FittedTransform tf = preprocess_fit(data, rows, spec_.preprocess);
    const Eigen::MatrixXd X = tf.features(data, rows);
    const auto n = static_cast<Index>(rows.size());
    Eigen::VectorXd y01(n);
    for (Index i = 0; i < n; ++i) y01(i) = data.outcome_values()(rows[static_cast<std::size_t>(i)]);

    Rng rng(derive_seed(seed, kTagFolds));
    const std::vector<int> fold = stratified_folds(data, rows, folds, rng);

    std::vector<double> errors(spec_.tuning.logit_c_grid.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
      std::vector<Index> tr, te;
      for (Index i = 0; i < n; ++i)
        (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
      Eigen::MatrixXd Xtr(static_cast<Index>(tr.size()), X.cols());
      Eigen::VectorXd ytr(static_cast<Index>(tr.size()));
      for (std::size_t i = 0; i < tr.size(); ++i) {
        Xtr.row(static_cast<Index>(i)) = X.row(tr[i]);
        ytr(static_cast<Index>(i)) = y01(tr[i]);
      }
      for (std::size_t ci = 0; ci < spec_.tuning.logit_c_grid.size(); ++ci) {
        const double lambda =
            1.0 / (spec_.tuning.logit_c_grid[ci] * static_cast<double>(tr.size()));
        const LinearModel m =
            fit_logit_l1(Xtr, ytr, lambda, 1e-8,
                         solver_iteration_budget(Xtr.rows(), Xtr.cols()));
        for (const Index i : te) {
          double z = m.intercept;
          for (Index j = 0; j < X.cols(); ++j) z += m.coef(j) * X(i, j);
          const double pred = z >= 0.0 ? 1.0 : 0.0;
          if (pred != y01(i)) errors[ci] += 1.0;
        }
      }
    }
    std::size_t best = 0;
    for (std::size_t ci = 1; ci < errors.size(); ++ci)
      if (errors[ci] < errors[best]) best = ci;  // ties keep the grid order
    hp.logit_c = spec_.tuning.logit_c_grid[best];
  }

  void tune_forest(const Dataset& data, std::span<const Index> rows, std::uint64_t seed,
                   Hyperparams& hp) const {
    const bool categorical = data.outcome_kind() == OutcomeKind::Categorical;
    const auto n = static_cast<Index>(rows.size());
    const int folds = categorical
                          ? classification_fold_count(data, rows)
                          : static_cast<int>(std::min<Index>(spec_.tuning.classification_folds, n));
    if (folds < 2) {
      hp.forest_depth = spec_.tuning.forest_depths.front();
      hp.forest_min_leaf = spec_.tuning.forest_min_leaf.front();
      return;
    }
    const FittedTransform tf = preprocess_fit(data, rows, spec_.preprocess);
    const Eigen::MatrixXd X = tf.features(data, rows);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      const Index r = rows[static_cast<std::size_t>(i)];
      y(i) = categorical ? data.outcome_values()(r) : tf.transform_outcome(data.outcome_values()(r));
    }
    Rng rng(derive_seed(seed, kTagFolds));
    const std::vector<int> fold =
        categorical ? stratified_folds(data, rows, folds, rng) : plain_folds(n, folds, rng);

    double best_score = 0.0;
    bool have_best = false;
    for (const int depth : spec_.tuning.forest_depths) {
      for (const Index min_leaf : spec_.tuning.forest_min_leaf) {
        double score = 0.0;
        for (int f = 0; f < folds; ++f) {
          std::vector<Index> tr, te;
          for (Index i = 0; i < n; ++i)
            (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
          Eigen::MatrixXd Xtr(static_cast<Index>(tr.size()), X.cols());
          Eigen::VectorXd ytr(static_cast<Index>(tr.size()));
          for (std::size_t i = 0; i < tr.size(); ++i) {
            Xtr.row(static_cast<Index>(i)) = X.row(tr[i]);
            ytr(static_cast<Index>(i)) = y(tr[i]);
          }
          ForestConfig cfg;
          cfg.n_trees = spec_.tuning.forest_trees;
          cfg.max_depth = depth;
          cfg.min_leaf = min_leaf;
          cfg.classification = categorical;
          cfg.n_classes = static_cast<Index>(data.outcome_labels().size());
          const Forest forest = Forest::fit(
              Xtr, ytr, cfg,
              derive_seed(seed, kTagFit, static_cast<std::uint64_t>(depth + 1),
                          static_cast<std::uint64_t>(min_leaf), static_cast<std::uint64_t>(f)));
          std::vector<double> buf(static_cast<std::size_t>(X.cols()));
          for (const Index i : te) {
            for (Index j = 0; j < X.cols(); ++j) buf[static_cast<std::size_t>(j)] = X(i, j);
            const double pred = forest.predict(buf.data());
            if (categorical)
              score += pred == y(i) ? 0.0 : 1.0;
            else {
              const double d = pred - y(i);
              score += d * d;
            }
          }
        }
        if (!have_best || score < best_score) {
          best_score = score;
          hp.forest_depth = depth;
          hp.forest_min_leaf = min_leaf;
          have_best = true;
        }
      }
    }
  }

  std::unique_ptr<PredictionRule> train_mean(const Dataset& data,
                                             std::span<const Index> rows) const {
    const FittedTransform tf = preprocess_fit(data, rows, spec_.preprocess);
    const Eigen::VectorXd y = tf.training_outcomes(data, rows);
    double s = 0.0;
    for (Index i = 0; i < y.size(); ++i) s += y(i);
    return std::make_unique<ConstantRule>(tf.back_transform(s / static_cast<double>(y.size())));
  }

  std::unique_ptr<PredictionRule> train_lasso(const Dataset& data, std::span<const Index> rows,
                                              const Hyperparams& hp) const {
    FittedTransform tf = preprocess_fit(data, rows, spec_.preprocess);
    const Eigen::MatrixXd X = tf.features(data, rows);
    const Eigen::VectorXd y = tf.training_outcomes(data, rows);
    const double lambda = hp.lasso_lambda ? *hp.lasso_lambda : lasso_max_penalty(X, y);
    LinearModel model =
        fit_lasso_cd(X, y, lambda, 1e-10, solver_iteration_budget(X.rows(), X.cols()));
    return std::make_unique<LinearRegressionRule>(std::move(tf), std::move(model));
  }

  std::unique_ptr<PredictionRule> train_logit(const Dataset& data, std::span<const Index> rows,
                                              const Hyperparams& hp) const {
    FittedTransform tf = preprocess_fit(data, rows, spec_.preprocess);
    const Eigen::MatrixXd X = tf.features(data, rows);
    const auto n = static_cast<Index>(rows.size());
    Eigen::VectorXd y01(n);
    for (Index i = 0; i < n; ++i) y01(i) = data.outcome_values()(rows[static_cast<std::size_t>(i)]);
    const double c = hp.logit_c ? *hp.logit_c : 1.0;
    const double lambda = 1.0 / (c * static_cast<double>(n));
    LinearModel model =
        fit_logit_l1(X, y01, lambda, 1e-8, solver_iteration_budget(X.rows(), X.cols()));
    return std::make_unique<LogitRule>(std::move(tf), std::move(model), 0.0, 1.0);
  }

  std::unique_ptr<PredictionRule> train_forest(const Dataset& data, std::span<const Index> rows,
                                               const Hyperparams& hp, std::uint64_t seed) const {
    FittedTransform tf = preprocess_fit(data, rows, spec_.preprocess);
    const Eigen::MatrixXd X = tf.features(data, rows);
    const bool categorical = data.outcome_kind() == OutcomeKind::Categorical;
    const auto n = static_cast<Index>(rows.size());
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      const Index r = rows[static_cast<std::size_t>(i)];
      y(i) = categorical ? data.outcome_values()(r) : tf.transform_outcome(data.outcome_values()(r));
    }
    ForestConfig cfg;
    cfg.n_trees = spec_.tuning.forest_trees;
    cfg.max_depth = hp.forest_depth.value_or(spec_.tuning.forest_depths.front());
    cfg.min_leaf = hp.forest_min_leaf.value_or(spec_.tuning.forest_min_leaf.front());
    cfg.classification = categorical;
    cfg.n_classes = static_cast<Index>(data.outcome_labels().size());
    Forest forest = Forest::fit(X, y, cfg, derive_seed(seed, kTagFit));
    return std::make_unique<ForestRule>(std::move(tf), std::move(forest));
  }

  std::unique_ptr<PredictionRule> train_knn(const Dataset& data, std::span<const Index> rows,
                                            const Hyperparams& hp) const {
    FittedTransform tf = preprocess_fit(data, rows, spec_.preprocess);
    KnnModel model;
    model.X = tf.features(data, rows);
    const bool categorical = data.outcome_kind() == OutcomeKind::Categorical;
    const auto n = static_cast<Index>(rows.size());
    model.y.resize(n);
    for (Index i = 0; i < n; ++i) {
      const Index r = rows[static_cast<std::size_t>(i)];
      model.y(i) =
          categorical ? data.outcome_values()(r) : tf.transform_outcome(data.outcome_values()(r));
    }
    model.classification = categorical;
    model.n_classes = static_cast<Index>(data.outcome_labels().size());
    model.k = std::min<Index>(hp.knn_k.value_or(spec_.tuning.knn_k), n);
    return std::make_unique<KnnRule>(std::move(tf), std::move(model));
  }

  LearnerSpec spec_;
};

}  // namespace

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec) {
  return std::make_unique<FamilyLearner>(spec);
}

Hyperparams tune(const LearnerSpec& spec, const Dataset& data, Index train_size,
                 std::uint64_t seed) {
  return FamilyLearner(spec).tune(data, train_size, seed);
}

std::unique_ptr<PredictionRule> train(const LearnerSpec& spec, const Hyperparams& hp,
                                      const Dataset& data, std::span<const Index> rows,
                                      std::uint64_t seed) {
  return FamilyLearner(spec).train(data, rows, hp, seed);
}

}  // namespace ess
