#pragma once

// Multi-class AdaBoost (SAMME) over shallow classification trees.

#include <cmath>
#include <span>
#include <vector>

#include "iotids/math.hpp"
#include "iotids/trees/tree.hpp"

namespace iotids {

struct AdaParams {
  std::size_t n_rounds = 50;
  std::size_t weak_depth = 1;
};

struct AdaStage {
  DecisionTree tree;
  double alpha = 0.0;
};

struct AdaModel {
  std::vector<AdaStage> stages;
  std::size_t class_count = 2;
  std::size_t n_features = 0;
  int prior_class = 0;  // used only when no stage was kept
  AdaParams params;
};

/// Per-round record of the boosting arithmetic.
struct AdaTrace {
  std::vector<std::vector<double>> weights;  // weights each round's learner saw
  std::vector<double> errors;
  std::vector<double> alphas;
};

/// Stage weight assigned when a weak learner makes no weighted error.
inline double ada_alpha_cap(std::size_t class_count) {
  return std::log((1.0 - 1e-10) / 1e-10) + std::log(static_cast<double>(class_count) - 1.0);
}

inline AdaModel fit_adaboost(const Matrix& x, std::span<const int> y, std::size_t class_count,
                             const AdaParams& params, AdaTrace* trace = nullptr) {
  if (x.rows == 0) throw Error(ErrorKind::EmptyInput, "adaboost: no rows");
  if (params.n_rounds < 1) throw Error(ErrorKind::EmptyInput, "adaboost: n_rounds must be >= 1");
  AdaModel model;
  model.params = params;
  model.class_count = class_count;
  model.n_features = x.cols;

  const std::size_t n = x.rows;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const std::vector<double> target(y.begin(), y.end());
  {
    std::vector<double> totals(class_count, 0.0);
    for (auto c : y) totals[static_cast<std::size_t>(c)] += 1.0;
    model.prior_class = argmax(totals);
  }

  TreeParams tp;
  tp.kind = TreeKind::Classification;
  tp.class_count = class_count;
  tp.max_depth = params.weak_depth;
  const auto sorted = SortedColumns::build(x);
  const double k = static_cast<double>(class_count);
  std::vector<char> miss(n);

  for (std::size_t round = 0; round < params.n_rounds; ++round) {
    auto tree = fit_tree(x, target, w, tp, sorted);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      miss[i] = tree.predict_class(x.row(i)) != y[i];
      if (miss[i]) err += w[i];
    }
    if (trace) {
      trace->weights.push_back(w);
      trace->errors.push_back(err);
    }
    if (err >= 1.0 - 1.0 / k) {
      if (trace) trace->alphas.push_back(0.0);
      break;  // no better than chance: discard
    }
    if (err <= 0.0) {
      const double alpha = ada_alpha_cap(class_count);
      if (trace) trace->alphas.push_back(alpha);
      model.stages.push_back({std::move(tree), alpha});
      break;
    }
    const double alpha = std::log((1.0 - err) / err) + std::log(k - 1.0);
    if (trace) trace->alphas.push_back(alpha);
    const double boost = std::exp(alpha);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (miss[i]) w[i] *= boost;
      total += w[i];
    }
    for (double& wi : w) wi /= total;
    model.stages.push_back({std::move(tree), alpha});
  }
  return model;
}

/// Per-class sum of stage weights voting for that class.
inline Matrix adaboost_scores(const AdaModel& model, const Matrix& x) {
  require_width(x, model.n_features, "adaboost");
  Matrix scores(x.rows, model.class_count);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (const auto& s : model.stages) {
      scores(i, static_cast<std::size_t>(s.tree.predict_class(x.row(i)))) += s.alpha;
    }
  }
  return scores;
}

inline std::vector<int> predict_adaboost(const AdaModel& model, const Matrix& x) {
  const auto scores = adaboost_scores(model, x);
  std::vector<int> out(x.rows, model.prior_class);
  if (model.stages.empty()) return out;
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = argmax(scores.row(i));
  return out;
}

}  // namespace iotids
