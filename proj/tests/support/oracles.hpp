#pragma once

// Independent brute-force oracles. None of these call into the library code
// they check.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "iotids/matrix.hpp"

namespace iotids::oracle {

struct RootSplit {
  int feature = -1;
  double threshold = 0.0;
};

/// Exhaustive Gini root split with exact integer arithmetic. Candidates are
/// midpoints between adjacent distinct values; the lowest feature, then the
/// lowest threshold, wins among equal gains. No split when no candidate has
/// positive gain.
inline RootSplit root_split(const Matrix& x, const std::vector<int>& y, std::size_t classes,
                            std::size_t min_leaf = 1) {
  using i64 = std::int64_t;
  const auto n = static_cast<i64>(x.rows);
  std::vector<i64> total(classes, 0);
  for (int c : y) ++total[static_cast<std::size_t>(c)];
  i64 parent_sq = 0;
  for (auto t : total) parent_sq += t * t;
  // Best score so far as a fraction num / den of sum_side sum_c c^2 / W_side.
  // Start at the parent's value (sq / n) so only positive gains qualify.
  i64 best_num = parent_sq, best_den = n;
  RootSplit best;
  for (std::size_t f = 0; f < x.cols; ++f) {
    std::set<double> values;
    for (std::size_t r = 0; r < x.rows; ++r) values.insert(x(r, f));
    for (auto it = values.begin(); it != values.end() && std::next(it) != values.end(); ++it) {
      const double v = *it, next = *std::next(it);
      std::vector<i64> left(classes, 0);
      i64 wl = 0;
      for (std::size_t r = 0; r < x.rows; ++r) {
        if (x(r, f) <= v) {
          ++left[static_cast<std::size_t>(y[r])];
          ++wl;
        }
      }
      const i64 wr = n - wl;
      if (wl < static_cast<i64>(min_leaf) || wr < static_cast<i64>(min_leaf)) continue;
      i64 al = 0, ar = 0;
      for (std::size_t c = 0; c < classes; ++c) {
        al += left[c] * left[c];
        ar += (total[c] - left[c]) * (total[c] - left[c]);
      }
      const i64 num = al * wr + ar * wl;
      const i64 den = wl * wr;
      if (static_cast<__int128>(num) * best_den > static_cast<__int128>(best_num) * den) {
        best_num = num;
        best_den = den;
        best.feature = static_cast<int>(f);
        best.threshold = v + (next - v) / 2.0;
      }
    }
  }
  return best;
}

struct ClassCounts {
  std::size_t tp = 0, fp = 0, fn = 0, support = 0;
};

struct MetricOracle {
  double accuracy = 0.0;
  std::vector<double> precision, recall, f1;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
};

/// Recounts TP/FP/FN per class straight from the label pairs.
inline MetricOracle metrics(const std::vector<int>& truth, const std::vector<int>& pred, std::size_t classes) {
  MetricOracle m;
  std::vector<ClassCounts> k(classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(pred[i]);
    ++k[t].support;
    if (t == p) {
      ++correct;
      ++k[t].tp;
    } else {
      ++k[p].fp;
      ++k[t].fn;
    }
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  for (std::size_t c = 0; c < classes; ++c) {
    const double tp = static_cast<double>(k[c].tp);
    const double p = k[c].tp + k[c].fp ? tp / static_cast<double>(k[c].tp + k[c].fp) : 0.0;
    const double r = k[c].tp + k[c].fn ? tp / static_cast<double>(k[c].tp + k[c].fn) : 0.0;
    const double f = p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
    m.precision.push_back(p);
    m.recall.push_back(r);
    m.f1.push_back(f);
    m.macro_precision += p / static_cast<double>(classes);
    m.macro_recall += r / static_cast<double>(classes);
    m.macro_f1 += f / static_cast<double>(classes);
  }
  return m;
}

/// Most frequent vote; among tied labels the one cast by the earliest member.
inline int mode_with_priority(const std::vector<int>& votes) {
  std::map<int, std::size_t> count;
  for (int v : votes) ++count[v];
  std::size_t top = 0;
  for (const auto& [label, n] : count) top = std::max(top, n);
  for (int v : votes) {
    if (count[v] == top) return v;
  }
  return -1;
}

}  // namespace iotids::oracle
