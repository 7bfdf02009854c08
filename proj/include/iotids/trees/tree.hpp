#pragma once

// CART decision tree. Classification trees split on weighted Gini gain,
// regression trees on weighted squared-error reduction. Candidate thresholds
// are midpoints between consecutive distinct values. Ties in gain go to the
// lowest feature index, then the lowest threshold.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "iotids/error.hpp"
#include "iotids/matrix.hpp"
#include "iotids/rng.hpp"

namespace iotids {

/// Gains within this tolerance of the incumbent count as ties.
inline constexpr double kGainTieTolerance = 1e-12;

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> value;  // class weights (classification) or {score}

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

enum class TreeKind { Classification, Regression };

struct TreeParams {
  TreeKind kind = TreeKind::Classification;
  std::size_t class_count = 2;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t features_per_split = 0;  // 0 = all features
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t n_features = 0;
  TreeParams params;

  bool operator==(const DecisionTree& o) const {
    return nodes == o.nodes && n_features == o.n_features;
  }

  std::size_t leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return i;
  }

  const std::vector<double>& leaf_value(std::span<const double> x) const {
    return nodes[leaf_index(x)].value;
  }

  /// Majority class of the reached leaf; ties go to the lower class.
  int predict_class(std::span<const double> x) const {
    const auto& v = leaf_value(x);
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  }

  std::size_t depth() const { return depth_from(0); }

 private:
  std::size_t depth_from(std::size_t i) const {
    if (nodes[i].is_leaf()) return 0;
    return 1 + std::max(depth_from(static_cast<std::size_t>(nodes[i].left)),
                        depth_from(static_cast<std::size_t>(nodes[i].right)));
  }
};

/// Per-feature row orderings (ascending value, then row index). Reusable
/// across fits on the same matrix.
struct SortedColumns {
  std::vector<std::vector<std::uint32_t>> order;

  static SortedColumns build(const Matrix& x) {
    SortedColumns s;
    s.order.resize(x.cols);
    for (std::size_t f = 0; f < x.cols; ++f) {
      auto& o = s.order[f];
      o.resize(x.rows);
      std::iota(o.begin(), o.end(), 0u);
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
    return s;
  }
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

namespace detail {

inline double gini_weighted(std::span<const double> counts, double total) {
  if (total <= 0.0) return 0.0;
  double sq = 0.0;
  for (double c : counts) sq += c * c;
  return total - sq / total;  // total * (1 - sum p^2)
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> target, std::span<const double> weights,
              const TreeParams& params, const SortedColumns& sorted, Rng* rng)
      : x_(x), target_(target), weights_(weights), params_(params), rng_(rng) {
    order_.resize(x.cols);
    for (std::size_t f = 0; f < x.cols; ++f) {
      auto& o = order_[f];
      o.reserve(x.rows);
      for (auto r : sorted.order[f]) {
        if (weights[r] > 0.0) o.push_back(r);
      }
    }
    buffer_.resize(order_.empty() ? 0 : order_[0].size());
    go_left_.assign(x.rows, 0);
  }

  DecisionTree build() {
    DecisionTree tree;
    tree.n_features = x_.cols;
    tree.params = params_;
    const std::size_t n = order_.empty() ? 0 : order_[0].size();
    grow(tree, 0, n, 0);
    return tree;
  }

 private:
  std::vector<double> node_value(std::size_t begin, std::size_t end) const {
    const auto& rows = order_[0];
    if (params_.kind == TreeKind::Classification) {
      std::vector<double> counts(params_.class_count, 0.0);
      for (std::size_t i = begin; i < end; ++i) {
        counts[static_cast<std::size_t>(target_[rows[i]])] += weights_[rows[i]];
      }
      return counts;
    }
    double sw = 0.0, swy = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      sw += weights_[rows[i]];
      swy += weights_[rows[i]] * target_[rows[i]];
    }
    return {sw > 0.0 ? swy / sw : 0.0};
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> feats(x_.cols);
    std::iota(feats.begin(), feats.end(), 0);
    const auto m = params_.features_per_split;
    if (m == 0 || m >= x_.cols || !rng_) return feats;
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_->below(feats.size() - i));
      std::swap(feats[i], feats[j]);
    }
    feats.resize(m);
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  SplitCandidate best_split(std::size_t begin, std::size_t end) {
    SplitCandidate best;
    const auto n = end - begin;
    if (n < 2 * params_.min_samples_leaf) return best;
    const bool cls = params_.kind == TreeKind::Classification;

    // Parent statistics.
    std::vector<double> total_counts(cls ? params_.class_count : 0, 0.0);
    double total_w = 0.0, total_wy = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = order_[0][i];
      total_w += weights_[r];
      if (cls) {
        total_counts[static_cast<std::size_t>(target_[r])] += weights_[r];
      } else {
        total_wy += weights_[r] * target_[r];
      }
    }
    const double parent_score =
        cls ? gini_weighted(total_counts, total_w) : -(total_w > 0 ? total_wy * total_wy / total_w : 0.0);

    std::vector<double> left_counts(total_counts.size());
    std::vector<double> right_counts(total_counts.size());
    for (auto f : candidate_features()) {
      const auto& rows = order_[f];
      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      double lw = 0.0, lwy = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        const auto r = rows[i];
        lw += weights_[r];
        if (cls) {
          left_counts[static_cast<std::size_t>(target_[r])] += weights_[r];
        } else {
          lwy += weights_[r] * target_[r];
        }
        const double v = x_(r, f);
        const double next = x_(rows[i + 1], f);
        if (!(v < next)) continue;
        const auto n_left = i + 1 - begin;
        if (n_left < params_.min_samples_leaf || n - n_left < params_.min_samples_leaf) continue;
        const double rw = total_w - lw;
        double child_score;
        if (cls) {
          for (std::size_t c = 0; c < left_counts.size(); ++c) right_counts[c] = total_counts[c] - left_counts[c];
          child_score = gini_weighted(left_counts, lw) + gini_weighted(right_counts, rw);
        } else {
          const double rwy = total_wy - lwy;
          child_score = -((lw > 0 ? lwy * lwy / lw : 0.0) + (rw > 0 ? rwy * rwy / rw : 0.0));
        }
        const double gain = parent_score - child_score;
        if (gain > best.gain + kGainTieTolerance) {
          best.feature = static_cast<int>(f);
          best.threshold = v + (next - v) / 2.0;
          best.gain = gain;
        }
      }
    }
    return best;
  }

  // Stable partition of every feature's segment by go_left_.
  std::size_t partition(std::size_t begin, std::size_t end) {
    std::size_t n_left = 0;
    for (auto& rows : order_) {
      std::size_t l = begin, b = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const auto r = rows[i];
        if (go_left_[r]) {
          rows[l++] = r;
        } else {
          buffer_[b++] = r;
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(b),
                rows.begin() + static_cast<std::ptrdiff_t>(l));
      n_left = l - begin;
    }
    return n_left;
  }

  int grow(DecisionTree& tree, std::size_t begin, std::size_t end, std::size_t depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[static_cast<std::size_t>(id)].value = node_value(begin, end);
    if (params_.max_depth != 0 && depth >= params_.max_depth) return id;
    const auto split = best_split(begin, end);
    if (split.feature < 0) return id;

    const auto f = static_cast<std::size_t>(split.feature);
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = order_[f][i];
      go_left_[r] = x_(r, f) <= split.threshold ? 1 : 0;
    }
    const auto n_left = partition(begin, end);
    const auto mid = begin + n_left;
    const int left = grow(tree, begin, mid, depth + 1);
    const int right = grow(tree, mid, end, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const Matrix& x_;
  std::span<const double> target_;
  std::span<const double> weights_;
  TreeParams params_;
  Rng* rng_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint32_t> buffer_;
  std::vector<std::uint8_t> go_left_;
};

inline void check_fit_inputs(const Matrix& x, std::size_t targets, std::span<const double> weights) {
  if (x.rows == 0 || x.cols == 0) throw Error(ErrorKind::EmptyInput, "no rows or columns to fit");
  if (targets != x.rows || weights.size() != x.rows) {
    throw Error(ErrorKind::ShapeMismatch, "targets/weights not aligned with rows");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::EmptyInput, "negative sample weight");
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorKind::EmptyInput, "all sample weights are zero");
}

}  // namespace detail

/// Fits a tree. For classification `target` holds class indices stored as
/// doubles. `rng` drives per-split feature sampling when
/// params.features_per_split > 0.
inline DecisionTree fit_tree(const Matrix& x, std::span<const double> target,
                             std::span<const double> weights, const TreeParams& params,
                             const SortedColumns& sorted, Rng* rng = nullptr) {
  detail::check_fit_inputs(x, target.size(), weights);
  return detail::TreeBuilder(x, target, weights, params, sorted, rng).build();
}

inline DecisionTree fit_tree(const Matrix& x, std::span<const double> target,
                             std::span<const double> weights, const TreeParams& params,
                             Rng* rng = nullptr) {
  detail::check_fit_inputs(x, target.size(), weights);
  return fit_tree(x, target, weights, params, SortedColumns::build(x), rng);
}

/// Classification convenience overload with unit weights.
inline DecisionTree fit_tree(const Matrix& x, std::span<const int> y, const TreeParams& params) {
  std::vector<double> target(y.begin(), y.end());
  std::vector<double> weights(y.size(), 1.0);
  return fit_tree(x, target, weights, params);
}

inline std::vector<int> predict_tree(const DecisionTree& tree, const Matrix& x) {
  require_width(x, tree.n_features, "decision tree");
  std::vector<int> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = tree.predict_class(x.row(i));
  return out;
}

}  // namespace iotids
