#pragma once

// Mini-batch Adam training with validation early stopping, and a
// central-difference gradient checker.

#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "iotids/neural/network.hpp"

namespace iotids::nn {

struct TrainParams {
  std::size_t batch = 256;
  std::size_t epochs = 100;
  std::size_t patience = 5;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
};

/// Entry e describes epoch e + 1. best_epoch is 1-based.
struct TrainingCurve {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_accuracy;
  std::size_t best_epoch = 0;
  std::size_t stopped_epoch = 0;
};

class Adam {
 public:
  explicit Adam(const TrainParams& p) : p_(p) {}

  void step(const std::vector<Param*>& params) {
    if (m_.empty()) {
      for (auto* prm : params) {
        m_.emplace_back(prm->value.size(), 0.0);
        v_.emplace_back(prm->value.size(), 0.0);
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(p_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(p_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto& prm = *params[k];
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < prm.value.size(); ++i) {
        const double g = prm.grad[i];
        m[i] = p_.beta1 * m[i] + (1.0 - p_.beta1) * g;
        v[i] = p_.beta2 * v[i] + (1.0 - p_.beta2) * g * g;
        prm.value[i] -= p_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + p_.eps);
      }
    }
  }

 private:
  TrainParams p_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

inline Tensor rows_tensor(const Matrix& x, std::span<const std::size_t> rows) {
  Tensor t({rows.size(), x.cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = x.row(rows[i]);
    std::copy(src.begin(), src.end(), t.data.begin() + static_cast<std::ptrdiff_t>(i * x.cols));
  }
  return t;
}

/// Eval-mode mean cross-entropy plus penalty, and accuracy.
inline std::pair<double, double> evaluate_network(Network& net, const Matrix& x, std::span<const int> y) {
  const auto p = net.predict_proba(x);
  double loss = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    loss += cross_entropy_at(p.row(i), static_cast<std::size_t>(y[i]));
    hits += argmax(p.row(i)) == y[i];
  }
  const double n = static_cast<double>(x.rows);
  return {loss / n + net.penalty(), static_cast<double>(hits) / n};
}

/// Trains `net` in place. Each epoch shuffles the rows with a generator
/// seeded from params.seed; training stops once validation loss has not
/// improved for `patience` epochs and the best-epoch parameters are restored.
inline TrainingCurve train_network(Network& net, const Matrix& x, std::span<const int> y,
                                   const Matrix& x_val, std::span<const int> y_val,
                                   const TrainParams& params) {
  if (x_val.rows == 0) throw Error(ErrorKind::EmptyValidation, "network training needs validation rows");
  if (x.cols != net.input_width() || x_val.cols != net.input_width() || y.size() != x.rows ||
      y_val.size() != x_val.rows || x.rows == 0) {
    throw Error(ErrorKind::ShapeMismatch, "training data does not match network input");
  }
  TrainingCurve curve;
  Adam adam(params);
  Rng order_rng(derive_seed(params.seed, 0));
  Rng dropout_rng(derive_seed(params.seed, 1));
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  auto best_arrays = net.arrays();
  double best_val = std::numeric_limits<double>::infinity();
  const auto trainable = net.params();
  const std::size_t batch = std::max<std::size_t>(1, params.batch);

  for (std::size_t epoch = 1; epoch <= params.epochs; ++epoch) {
    shuffle(std::span(order), order_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < x.rows; start += batch) {
      const std::size_t n = std::min(batch, x.rows - start);
      const auto idx = std::span(order).subspan(start, n);
      const Tensor xb = rows_tensor(x, idx);
      std::vector<int> yb(n);
      for (std::size_t i = 0; i < n; ++i) yb[i] = y[idx[i]];
      net.zero_grad();
      const double l = net.loss(xb, yb, Mode::Train, &dropout_rng, true);
      if (!std::isfinite(l)) {
        throw Error(ErrorKind::NonFiniteLoss, "training loss diverged at epoch " + std::to_string(epoch));
      }
      adam.step(trainable);
      loss_sum += l;
      ++batches;
    }
    const auto [vl, va] = evaluate_network(net, x_val, y_val);
    if (!std::isfinite(vl)) {
      throw Error(ErrorKind::NonFiniteLoss, "validation loss diverged at epoch " + std::to_string(epoch));
    }
    curve.train_loss.push_back(loss_sum / static_cast<double>(batches));
    curve.val_loss.push_back(vl);
    curve.val_accuracy.push_back(va);
    curve.stopped_epoch = epoch;
    if (vl < best_val) {
      best_val = vl;
      curve.best_epoch = epoch;
      best_arrays = net.arrays();
    } else if (epoch - curve.best_epoch >= params.patience) {
      break;
    }
  }
  net.set_arrays(best_arrays);
  return curve;
}

/// Max over all parameters of |analytic - numeric| / max(1, |analytic| +
/// |numeric|), where numeric is the central difference with step h. The
/// loss is evaluated in eval mode (dropout off, batch-norm statistics frozen).
inline double grad_check(Network& net, const Matrix& x, std::span<const int> y, double h = 1e-4) {
  std::vector<std::size_t> all(x.rows);
  std::iota(all.begin(), all.end(), 0);
  const Tensor xt = rows_tensor(x, all);
  net.zero_grad();
  net.loss(xt, y, Mode::Eval, nullptr, true);
  double worst = 0.0;
  for (auto* p : net.params()) {
    const auto analytic = p->grad;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = net.loss(xt, y, Mode::Eval, nullptr, false);
      p->value[i] = saved - h;
      const double down = net.loss(xt, y, Mode::Eval, nullptr, false);
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace iotids::nn
