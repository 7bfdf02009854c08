#pragma once

// Scalar and vector building blocks: activations, softmax cross-entropy,
// Glorot initialization and the elastic-net penalty.

#include <cmath>
#include <span>
#include <vector>

#include "iotids/error.hpp"
#include "iotids/math.hpp"
#include "iotids/rng.hpp"

namespace iotids::nn {

struct ValueGrad {
  double value;
  double grad;
};

/// max(0, x); the gradient at exactly 0 is taken as 0.
inline ValueGrad relu(double x) { return {x > 0.0 ? x : 0.0, x > 0.0 ? 1.0 : 0.0}; }

/// x for x > 0, alpha (e^x - 1) otherwise.
inline ValueGrad elu(double x, double alpha) {
  if (x > 0.0) return {x, 1.0};
  const double e = std::exp(x);
  return {alpha * (e - 1.0), alpha * e};
}

using iotids::softmax;

/// -sum_i y_i log p_i for one-hot y, p floored at 1e-12.
inline double categorical_cross_entropy(std::span<const double> p, std::span<const double> y) {
  if (p.size() != y.size()) throw Error(ErrorKind::BadOneHot, "probability/target size mismatch");
  std::size_t ones = 0, hot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) {
      ++ones;
      hot = i;
    } else if (y[i] != 0.0) {
      throw Error(ErrorKind::BadOneHot, "target entries must be 0 or 1");
    }
  }
  if (ones != 1) throw Error(ErrorKind::BadOneHot, "target must contain exactly one 1");
  return cross_entropy_at(p, hot);
}

inline double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0) / std::sqrt(static_cast<double>(fan_in + fan_out));
}

/// `count` draws (default fan_in x fan_out), uniform on the open interval
/// (-bound, bound).
inline std::vector<double> glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng,
                                          std::size_t count = 0) {
  const double bound = glorot_bound(fan_in, fan_out);
  std::vector<double> w(count ? count : fan_in * fan_out);
  for (double& v : w) {
    v = bound * (2.0 * rng.uniform_open() - 1.0);
    if (std::abs(v) >= bound) v = std::nextafter(v, 0.0);
  }
  return w;
}

inline double sign0(double w) { return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0); }

/// lambda1 * sum|w| + lambda2 * sum w^2.
inline double elastic_net_value(std::span<const double> w, double lambda1, double lambda2) {
  double l1 = 0.0, l2 = 0.0;
  for (double v : w) {
    l1 += std::abs(v);
    l2 += v * v;
  }
  return lambda1 * l1 + lambda2 * l2;
}

/// Adds lambda1 * sign(w) + 2 lambda2 * w to `grad` (sign(0) = 0).
inline void elastic_net_grad(std::span<const double> w, double lambda1, double lambda2,
                             std::span<double> grad) {
  for (std::size_t i = 0; i < w.size(); ++i) grad[i] += lambda1 * sign0(w[i]) + 2.0 * lambda2 * w[i];
}

}  // namespace iotids::nn
