#pragma once

// Stratified train/test/validation splits and stratified k-fold plans.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "iotids/error.hpp"
#include "iotids/rng.hpp"

namespace iotids {

struct Fractions {
  double train = 0.7;
  double test = 0.2;
  double val = 0.1;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::size_t> val;
  Fractions fractions;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> indices_by_class(std::span<const int> labels,
                                                              std::size_t class_count) {
  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count) {
      throw Error(ErrorKind::ShapeMismatch, "label " + std::to_string(labels[i]) + " out of range");
    }
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return by_class;
}

/// Largest-remainder apportionment of `n` over `weights` (summing to 1).
/// Equal remainders go to the lower index.
inline std::vector<std::size_t> largest_remainder(std::size_t n, std::span<const double> weights) {
  std::vector<std::size_t> counts(weights.size());
  std::vector<double> rem(weights.size());
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < weights.size(); ++p) {
    const double exact = static_cast<double>(n) * weights[p];
    counts[p] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[p] = exact - static_cast<double>(counts[p]);
    assigned += counts[p];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < weights.size(); ++p) {
      if (rem[p] > rem[best] + 1e-12) best = p;
    }
    ++counts[best];
    rem[best] = -1.0;
    ++assigned;
  }
  return counts;
}

/// Hands each class's leftover rows to partitions, at most one per cell and
/// only where the exact share had a fractional part, so that partition p
/// receives demand[p] rows. Solved as a min-cost flow where a cell costs
/// minus its remainder; rows the flow cannot place go to the largest
/// remainder of their class.
inline std::vector<std::array<std::size_t, 3>> round_cells(const std::vector<std::size_t>& leftover,
                                                           const std::array<std::size_t, 3>& demand,
                                                           const std::vector<std::array<double, 3>>& fracs) {
  const std::size_t C = leftover.size();
  const std::size_t src = C + 3, sink = C + 4, nodes = C + 5;
  struct Edge {
    std::size_t to;
    long cap;
    double cost;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> adj(nodes);
  const auto add = [&](std::size_t a, std::size_t b, long cap, double cost) {
    adj[a].push_back(edges.size());
    edges.push_back({b, cap, cost});
    adj[b].push_back(edges.size());
    edges.push_back({a, 0, -cost});
  };
  for (std::size_t c = 0; c < C; ++c) add(src, c, static_cast<long>(leftover[c]), 0.0);
  std::vector<std::array<std::size_t, 3>> cell_edge(C);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t p = 0; p < 3; ++p) {
      cell_edge[c][p] = edges.size();
      add(c, C + p, fracs[c][p] > 1e-12 ? 1 : 0, -fracs[c][p]);
    }
  }
  for (std::size_t p = 0; p < 3; ++p) add(C + p, sink, static_cast<long>(demand[p]), 0.0);

  // Successive shortest paths, one unit at a time (Bellman-Ford).
  for (;;) {
    std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> via(nodes, edges.size());
    dist[src] = 0.0;
    for (std::size_t round = 0; round < nodes; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < nodes; ++u) {
        if (dist[u] == std::numeric_limits<double>::infinity()) continue;
        for (auto e : adj[u]) {
          if (edges[e].cap > 0 && dist[u] + edges[e].cost < dist[edges[e].to] - 1e-12) {
            dist[edges[e].to] = dist[u] + edges[e].cost;
            via[edges[e].to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (via[sink] == edges.size()) break;
    for (std::size_t v = sink; v != src; v = edges[via[v] ^ 1].to) {
      --edges[via[v]].cap;
      ++edges[via[v] ^ 1].cap;
    }
  }

  std::vector<std::array<std::size_t, 3>> out(C, {0, 0, 0});
  for (std::size_t c = 0; c < C; ++c) {
    std::size_t placed = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      out[c][p] = static_cast<std::size_t>(edges[cell_edge[c][p] ^ 1].cap);
      placed += out[c][p];
    }
    for (; placed < leftover[c]; ++placed) {
      std::size_t best = 3;
      for (std::size_t p = 0; p < 3; ++p) {
        if (out[c][p] != 0 || fracs[c][p] <= 1e-12) continue;
        if (best == 3 || fracs[c][p] > fracs[c][best] + 1e-12) best = p;
      }
      ++out[c][best == 3 ? 0 : best];
    }
  }
  return out;
}

}  // namespace detail

/// Per class: shuffle the class's indices with derive_seed(seed, class) and
/// cut them into train/test/val. Cell counts are floor or ceiling of
/// n_class * fraction and partition totals follow largest-remainder rounding
/// of N * fraction; among such roundings the one favouring larger remainders
/// is taken. Partitions list
/// classes in class order.
inline SplitIndices stratified_split(std::span<const int> labels, std::size_t class_count,
                                     Fractions fr, std::uint64_t seed) {
  const std::array<double, 3> f{fr.train, fr.test, fr.val};
  for (double v : f) {
    if (!(v >= 0.0)) throw Error(ErrorKind::BadFractions, "fractions must be non-negative");
  }
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) {
    throw Error(ErrorKind::BadFractions, "fractions must sum to 1");
  }
  auto by_class = detail::indices_by_class(labels, class_count);

  // Column targets from the global apportionment.
  const auto totals = detail::largest_remainder(labels.size(), f);
  std::array<std::size_t, 3> demand{};
  std::vector<std::array<std::size_t, 3>> cells(class_count);
  std::vector<std::array<double, 3>> fracs(class_count);
  for (std::size_t c = 0; c < class_count; ++c) {
    const double n = static_cast<double>(by_class[c].size());
    for (std::size_t p = 0; p < 3; ++p) {
      const double exact = n * f[p];
      cells[c][p] = static_cast<std::size_t>(std::floor(exact + 1e-9));
      fracs[c][p] = exact - static_cast<double>(cells[c][p]);
    }
  }
  for (std::size_t p = 0; p < 3; ++p) {
    std::size_t floor_sum = 0;
    for (std::size_t c = 0; c < class_count; ++c) floor_sum += cells[c][p];
    demand[p] = totals[p] > floor_sum ? totals[p] - floor_sum : 0;
  }
  std::vector<std::size_t> leftover(class_count);
  for (std::size_t c = 0; c < class_count; ++c) {
    leftover[c] = by_class[c].size() - cells[c][0] - cells[c][1] - cells[c][2];
  }
  const auto extra = detail::round_cells(leftover, demand, fracs);
  for (std::size_t c = 0; c < class_count; ++c) {
    for (std::size_t p = 0; p < 3; ++p) cells[c][p] += extra[c][p];
  }

  SplitIndices out;
  out.fractions = fr;
  out.seed = seed;
  std::array<std::vector<std::size_t>*, 3> parts{&out.train, &out.test, &out.val};
  for (std::size_t c = 0; c < class_count; ++c) {
    auto& idx = by_class[c];
    Rng rng(derive_seed(seed, c));
    shuffle(std::span(idx), rng);
    std::size_t pos = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      parts[p]->insert(parts[p]->end(), idx.begin() + static_cast<std::ptrdiff_t>(pos),
                       idx.begin() + static_cast<std::ptrdiff_t>(pos + cells[c][p]));
      pos += cells[c][p];
    }
  }
  return out;
}

struct FoldPlan {
  std::size_t k = 5;
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;

  /// (train, validation) for fold `i`: validation is fold i, train is the
  /// other folds concatenated in fold order.
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> pair(std::size_t i) const {
    std::vector<std::size_t> train;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      if (f != i) train.insert(train.end(), folds[f].begin(), folds[f].end());
    }
    return {std::move(train), folds.at(i)};
  }
};

/// Stratified k-fold: each class's shuffled indices are dealt round-robin to
/// the folds, continuing the deal position across classes so fold sizes
/// differ by at most one.
inline FoldPlan k_fold(std::span<const int> labels, std::size_t class_count, std::size_t k,
                       std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::TooFewRows, "k must be >= 2");
  auto by_class = detail::indices_by_class(labels, class_count);
  for (std::size_t c = 0; c < class_count; ++c) {
    if (!by_class[c].empty() && by_class[c].size() < k) {
      throw Error(ErrorKind::TooFewRows, "class " + std::to_string(c) + " has " +
                                             std::to_string(by_class[c].size()) + " rows < k = " +
                                             std::to_string(k));
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(k);
  std::size_t deal = 0;
  for (std::size_t c = 0; c < class_count; ++c) {
    auto& idx = by_class[c];
    Rng rng(derive_seed(seed, c));
    shuffle(std::span(idx), rng);
    for (auto i : idx) plan.folds[deal++ % k].push_back(i);
  }
  return plan;
}

/// Mean of per-fold scores.
inline double cv_mean(std::span<const double> scores) {
  if (scores.empty()) return 0.0;
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

}  // namespace iotids
