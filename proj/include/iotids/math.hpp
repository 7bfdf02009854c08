#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace iotids {

/// Probabilities are floored at this value before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

/// Softmax with max subtraction.
inline void softmax_inplace(std::span<double> z) {
  if (z.empty()) return;
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

inline std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.begin(), z.end());
  softmax_inplace(p);
  return p;
}

/// -log p[true_class], with p floored.
inline double cross_entropy_at(std::span<const double> p, std::size_t true_class) {
  return -std::log(std::max(p[true_class], kProbabilityFloor));
}

/// Index of the largest value; ties go to the lowest index.
inline int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace iotids
