#pragma once

// Linear soft-margin SVM trained on the primal hinge objective
//   (1/2)|w|^2 + C * sum_i max(0, 1 - y_i (w.x_i + b))
// by seeded stochastic subgradient descent.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "iotids/error.hpp"
#include "iotids/matrix.hpp"
#include "iotids/rng.hpp"

namespace iotids {

struct SvmParams {
  double c = 1.0;
  std::size_t epochs = 20;
  double eta0 = 0.1;
  double decay = 0.01;
  std::uint64_t seed = 0;
};

struct SvmModel {
  std::vector<double> w;
  double b = 0.0;
  double c = 1.0;
  std::size_t epochs_trained = 0;
  SvmParams params;
};

inline double svm_margin(const SvmModel& m, std::span<const double> x) {
  double s = m.b;
  for (std::size_t j = 0; j < m.w.size(); ++j) s += m.w[j] * x[j];
  return s;
}

/// Objective value at (w, b) for labels in {-1, +1}.
inline double svm_objective(std::span<const double> w, double b, const Matrix& x,
                            std::span<const int> y, double c) {
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    double m = b;
    const auto row = x.row(i);
    for (std::size_t j = 0; j < w.size(); ++j) m += w[j] * row[j];
    hinge += std::max(0.0, 1.0 - y[i] * m);
  }
  return 0.5 * reg + c * hinge;
}

/// Step t uses eta_t = eta0 / (1 + t * decay). Each sample's update uses the
/// per-sample share of the objective, w / N + C * dhinge_i. The returned
/// iterate is the best of the starting point and the end of each epoch.
inline SvmModel fit_linear_svm(const Matrix& x, std::span<const int> y, const SvmParams& params) {
  if (y.size() != x.rows) throw Error(ErrorKind::ShapeMismatch, "svm: labels not aligned with rows");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) has_pos = true;
    else if (v == -1) has_neg = true;
    else throw Error(ErrorKind::ShapeMismatch, "svm labels must be -1 or +1");
  }
  if (!has_pos || !has_neg) throw Error(ErrorKind::SingleClass, "svm needs both classes");

  const std::size_t n = x.rows, d = x.cols;
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> best_w = w;
  double best_b = 0.0;
  double best_obj = svm_objective(w, b, x, y, params.c);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(params.seed);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    shuffle(std::span(order), rng);
    for (auto i : order) {
      const double eta = params.eta0 / (1.0 + static_cast<double>(t) * params.decay);
      ++t;
      const auto row = x.row(i);
      double m = b;
      for (std::size_t j = 0; j < d; ++j) m += w[j] * row[j];
      const bool active = y[i] * m < 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        double g = w[j] * inv_n;
        if (active) g -= params.c * y[i] * row[j];
        w[j] -= eta * g;
      }
      if (active) b += eta * params.c * y[i];
    }
    const double obj = svm_objective(w, b, x, y, params.c);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_b = b;
    }
  }
  return {std::move(best_w), best_b, params.c, params.epochs, params};
}

struct SvmPrediction {
  std::vector<int> labels;  // -1 / +1; margin 0 maps to +1
  std::vector<double> margins;
};

inline SvmPrediction predict_svm(const SvmModel& model, const Matrix& x) {
  require_width(x, model.w.size(), "svm");
  SvmPrediction out;
  out.labels.resize(x.rows);
  out.margins.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    out.margins[i] = svm_margin(model, x.row(i));
    out.labels[i] = out.margins[i] >= 0.0 ? 1 : -1;
  }
  return out;
}

}  // namespace iotids
