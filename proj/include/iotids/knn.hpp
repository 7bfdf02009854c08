#pragma once

// Brute-force k-nearest-neighbor classifier (Euclidean distance).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "iotids/error.hpp"
#include "iotids/matrix.hpp"

namespace iotids {

struct KnnModel {
  Matrix x;
  std::vector<int> y;
  std::size_t k = 5;
  std::size_t class_count = 2;
};

inline KnnModel fit_knn(Matrix x, std::vector<int> y, std::size_t k, std::size_t class_count) {
  if (k < 1 || k > x.rows) {
    throw Error(ErrorKind::BadK, "k = " + std::to_string(k) + " with " + std::to_string(x.rows) + " rows");
  }
  if (y.size() != x.rows) throw Error(ErrorKind::ShapeMismatch, "knn: labels not aligned with rows");
  return {std::move(x), std::move(y), k, class_count};
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Neighbors ordered by (distance, stored index); the label is the majority
/// among the k nearest, ties broken by smaller summed distance, then lower
/// class index.
inline int knn_classify(const KnnModel& model, std::span<const double> q,
                        std::vector<std::pair<double, std::size_t>>& scratch) {
  scratch.resize(model.x.rows);
  for (std::size_t i = 0; i < model.x.rows; ++i) scratch[i] = {euclidean(q, model.x.row(i)), i};
  const auto kth = scratch.begin() + static_cast<std::ptrdiff_t>(model.k);
  std::partial_sort(scratch.begin(), kth, scratch.end());
  std::vector<std::size_t> votes(model.class_count, 0);
  std::vector<double> dist_sum(model.class_count, 0.0);
  for (auto it = scratch.begin(); it != kth; ++it) {
    const auto c = static_cast<std::size_t>(model.y[it->second]);
    ++votes[c];
    dist_sum[c] += it->first;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < model.class_count; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 && dist_sum[c] < dist_sum[best])) {
      best = c;
    }
  }
  return static_cast<int>(best);
}

inline std::vector<int> predict_knn(const KnnModel& model, const Matrix& q) {
  require_width(q, model.x.cols, "knn");
  std::vector<int> out(q.rows);
  std::vector<std::pair<double, std::size_t>> scratch;
  for (std::size_t i = 0; i < q.rows; ++i) out[i] = knn_classify(model, q.row(i), scratch);
  return out;
}

}  // namespace iotids
