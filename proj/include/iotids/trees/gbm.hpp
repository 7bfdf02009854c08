#pragma once

// Second-order gradient boosting over regression trees with a softmax
// objective, L2 leaf regularization and validation-loss early stopping.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "iotids/math.hpp"
#include "iotids/trees/tree.hpp"

namespace iotids {

struct GbmParams {
  std::size_t max_rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 6;
  double lambda_leaf = 1.0;
  std::size_t patience = 5;
  std::size_t min_samples_leaf = 1;
};

struct GbmModel {
  std::vector<std::vector<DecisionTree>> rounds;  // rounds[r][class]; leaves hold unscaled w
  double learning_rate = 0.1;
  std::size_t best_round = 0;  // prediction uses rounds[0 .. best_round)
  std::size_t class_count = 2;
  std::size_t n_features = 0;
  GbmParams params;
};

/// Losses after each boosting round: entry r is the mean cross-entropy after
/// r + 1 rounds. `best` is the 1-based round with minimum validation loss.
struct TrainCurve {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t stopped_at = 0;
  std::size_t best = 0;
};

/// Raw class scores using the first `rounds` rounds.
inline Matrix gbm_scores(const GbmModel& model, const Matrix& x, std::size_t rounds) {
  require_width(x, model.n_features, "gbm");
  Matrix scores(x.rows, model.class_count);
  rounds = std::min(rounds, model.rounds.size());
  for (std::size_t i = 0; i < x.rows; ++i) {
    auto s = scores.row(i);
    for (std::size_t r = 0; r < rounds; ++r) {
      for (std::size_t k = 0; k < model.class_count; ++k) {
        s[k] += model.learning_rate * model.rounds[r][k].leaf_value(x.row(i))[0];
      }
    }
  }
  return scores;
}

struct ProbabilisticPrediction {
  std::vector<int> labels;
  Matrix probabilities;
};

inline ProbabilisticPrediction predict_gbm(const GbmModel& model, const Matrix& x) {
  ProbabilisticPrediction out;
  out.probabilities = gbm_scores(model, x, model.best_round);
  out.labels.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    softmax_inplace(out.probabilities.row(i));
    out.labels[i] = argmax(out.probabilities.row(i));
  }
  return out;
}

namespace detail {

inline double mean_softmax_loss(const Matrix& scores, std::span<const int> y) {
  if (scores.rows == 0) return 0.0;
  std::vector<double> p(scores.cols);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows; ++i) {
    const auto s = scores.row(i);
    std::copy(s.begin(), s.end(), p.begin());
    softmax_inplace(p);
    total += cross_entropy_at(p, static_cast<std::size_t>(y[i]));
  }
  return total / static_cast<double>(scores.rows);
}

}  // namespace detail

inline std::pair<GbmModel, TrainCurve> fit_gbm(const Matrix& x, std::span<const int> y,
                                               const Matrix& x_val, std::span<const int> y_val,
                                               std::size_t class_count, const GbmParams& params) {
  if (x.rows == 0) throw Error(ErrorKind::EmptyInput, "gbm: no training rows");
  if (x_val.rows == 0) throw Error(ErrorKind::EmptyValidation, "gbm: early stopping needs validation rows");
  require_width(x_val, x.cols, "gbm validation");

  GbmModel model;
  model.params = params;
  model.learning_rate = params.learning_rate;
  model.class_count = class_count;
  model.n_features = x.cols;
  TrainCurve curve;

  const std::size_t n = x.rows;
  Matrix scores(n, class_count);
  Matrix val_scores(x_val.rows, class_count);
  Matrix prob(n, class_count);
  std::vector<double> neg_grad(n), grad(n), hess(n);
  const std::vector<double> unit(n, 1.0);
  const auto sorted = SortedColumns::build(x);

  TreeParams tp;
  tp.kind = TreeKind::Regression;
  tp.max_depth = params.max_depth;
  tp.min_samples_leaf = params.min_samples_leaf;

  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t round = 1; round <= params.max_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = scores.row(i);
      auto p = prob.row(i);
      std::copy(s.begin(), s.end(), p.begin());
      softmax_inplace(p);
    }
    std::vector<DecisionTree> trees;
    trees.reserve(class_count);
    for (std::size_t k = 0; k < class_count; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = prob(i, k);
        grad[i] = p - (static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0);
        hess[i] = p * (1.0 - p);
        neg_grad[i] = -grad[i];
      }
      auto tree = fit_tree(x, neg_grad, unit, tp, sorted);
      // Newton leaf values from the rows reaching each leaf.
      std::vector<double> g_sum(tree.nodes.size(), 0.0), h_sum(tree.nodes.size(), 0.0);
      std::vector<std::size_t> leaf_of(n);
      for (std::size_t i = 0; i < n; ++i) {
        leaf_of[i] = tree.leaf_index(x.row(i));
        g_sum[leaf_of[i]] += grad[i];
        h_sum[leaf_of[i]] += hess[i];
      }
      for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
        if (!tree.nodes[node].is_leaf()) continue;
        const double denom = h_sum[node] + params.lambda_leaf;
        tree.nodes[node].value = {denom > 0.0 ? -g_sum[node] / denom : 0.0};
      }
      for (std::size_t i = 0; i < n; ++i) {
        scores(i, k) += params.learning_rate * tree.nodes[leaf_of[i]].value[0];
      }
      for (std::size_t i = 0; i < x_val.rows; ++i) {
        val_scores(i, k) += params.learning_rate * tree.leaf_value(x_val.row(i))[0];
      }
      trees.push_back(std::move(tree));
    }
    model.rounds.push_back(std::move(trees));
    curve.train_loss.push_back(detail::mean_softmax_loss(scores, y));
    const double vl = detail::mean_softmax_loss(val_scores, y_val);
    curve.val_loss.push_back(vl);
    curve.stopped_at = round;
    if (vl < best_val) {
      best_val = vl;
      curve.best = round;
    } else if (round - curve.best >= params.patience) {
      break;
    }
  }
  model.best_round = curve.best;
  return {std::move(model), std::move(curve)};
}

}  // namespace iotids
