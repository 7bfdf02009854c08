#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "iotids/math.hpp"
#include "iotids/trees/tree.hpp"

namespace iotids {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t features_per_split = 0;  // 0 = ceil(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t features_per_split = 0;
  std::size_t class_count = 2;
  std::size_t n_features = 0;
  ForestParams params;
};

struct ForestPrediction {
  std::vector<int> labels;
  Matrix shares;  // per-class fraction of tree votes
};

inline std::size_t default_features_per_split(std::size_t d) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
}

/// Seed of tree `t`.
inline std::uint64_t forest_tree_seed(std::uint64_t master, std::size_t t) {
  return derive_seed(master, t);
}

/// N draws with replacement, returned as per-row multiplicities.
inline std::vector<double> bootstrap_counts(std::size_t n, std::uint64_t tree_seed) {
  Rng rng(derive_seed(tree_seed, 0));
  std::vector<double> counts(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) counts[rng.below(n)] += 1.0;
  return counts;
}

/// Fits one tree per entry of `tree_weights` (row multiplicities). Split
/// feature sampling for tree t is seeded from its tree seed.
inline ForestModel fit_random_forest_weighted(const Matrix& x, std::span<const int> y,
                                              std::size_t class_count, const ForestParams& params,
                                              const std::vector<std::vector<double>>& tree_weights) {
  if (x.rows == 0) throw Error(ErrorKind::EmptyInput, "random forest: no rows");
  ForestModel model;
  model.params = params;
  model.class_count = class_count;
  model.n_features = x.cols;
  model.features_per_split =
      params.features_per_split ? params.features_per_split : default_features_per_split(x.cols);
  TreeParams tp;
  tp.kind = TreeKind::Classification;
  tp.class_count = class_count;
  tp.max_depth = params.max_depth;
  tp.min_samples_leaf = params.min_samples_leaf;
  tp.features_per_split = model.features_per_split;
  const std::vector<double> target(y.begin(), y.end());
  const auto sorted = SortedColumns::build(x);
  for (std::size_t t = 0; t < tree_weights.size(); ++t) {
    const auto seed = forest_tree_seed(params.seed, t);
    Rng rng(derive_seed(seed, 1));
    model.trees.push_back(fit_tree(x, target, tree_weights[t], tp, sorted, &rng));
    model.tree_seeds.push_back(seed);
  }
  return model;
}

inline ForestModel fit_random_forest(const Matrix& x, std::span<const int> y, std::size_t class_count,
                                     const ForestParams& params) {
  if (x.rows == 0) throw Error(ErrorKind::EmptyInput, "random forest: no rows");
  if (params.n_trees < 1) throw Error(ErrorKind::EmptyInput, "random forest: n_trees must be >= 1");
  std::vector<std::vector<double>> weights;
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    weights.push_back(params.bootstrap ? bootstrap_counts(x.rows, forest_tree_seed(params.seed, t))
                                       : std::vector<double>(x.rows, 1.0));
  }
  return fit_random_forest_weighted(x, y, class_count, params, weights);
}

/// Each tree casts one vote (its leaf's majority class); label = argmax of
/// vote share, lowest class on ties.
inline ForestPrediction predict_forest(const ForestModel& model, const Matrix& x) {
  require_width(x, model.n_features, "random forest");
  ForestPrediction out;
  out.labels.resize(x.rows);
  out.shares = Matrix(x.rows, model.class_count);
  const double per_tree = 1.0 / static_cast<double>(model.trees.size());
  for (std::size_t i = 0; i < x.rows; ++i) {
    auto share = out.shares.row(i);
    for (const auto& tree : model.trees) share[static_cast<std::size_t>(tree.predict_class(x.row(i)))] += per_tree;
    out.labels[i] = argmax(share);
  }
  return out;
}

}  // namespace iotids
