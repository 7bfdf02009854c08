#pragma once

// Layers with explicit forward/backward passes. A layer caches what its
// backward pass needs during forward; backward accumulates parameter
// gradients into Param::grad and returns the gradient w.r.t. its input.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "iotids/neural/functions.hpp"
#include "iotids/neural/tensor.hpp"
#include "iotids/rng.hpp"

namespace iotids::nn {

enum class Mode { Train, Eval };

struct Param {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;
  bool regularized = false;  // kernels only; biases and batch-norm excluded

  void resize_grad() { grad.assign(value.size(), 0.0); }
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual Tensor forward(const Tensor& x, Mode mode, Rng* rng) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
  /// Non-trainable arrays that are part of the model (batch-norm statistics).
  virtual std::vector<std::vector<double>*> state() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

// ---------------------------------------------------------------------------

class Dense final : public Layer {
 public:
  Dense(std::size_t n_in, std::size_t n_out) : n_in_(n_in), n_out_(n_out) {
    w_.name = "kernel";
    w_.value.assign(n_in * n_out, 0.0);
    w_.regularized = true;
    b_.name = "bias";
    b_.value.assign(n_out, 0.0);
    w_.resize_grad();
    b_.resize_grad();
  }

  std::string kind() const override { return "dense"; }
  std::size_t n_in() const { return n_in_; }
  std::size_t n_out() const { return n_out_; }
  Param& kernel() { return w_; }

  Tensor forward(const Tensor& x, Mode, Rng*) override {
    if (x.per_row() != n_in_) {
      throw Error(ErrorKind::ShapeMismatch, "dense expects " + std::to_string(n_in_) + " inputs, got " +
                                                std::to_string(x.per_row()));
    }
    input_ = x;
    const std::size_t batch = x.batch();
    Tensor y({batch, n_out_});
    for (std::size_t r = 0; r < batch; ++r) {
      double* out = y.data.data() + r * n_out_;
      std::copy(b_.value.begin(), b_.value.end(), out);
      const double* in = x.data.data() + r * n_in_;
      for (std::size_t i = 0; i < n_in_; ++i) {
        const double xi = in[i];
        if (xi == 0.0) continue;
        const double* wrow = w_.value.data() + i * n_out_;
        for (std::size_t o = 0; o < n_out_; ++o) out[o] += xi * wrow[o];
      }
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    const std::size_t batch = g.batch();
    Tensor dx({batch, n_in_});
    for (std::size_t r = 0; r < batch; ++r) {
      const double* go = g.data.data() + r * n_out_;
      const double* in = input_.data.data() + r * n_in_;
      double* dxi = dx.data.data() + r * n_in_;
      for (std::size_t o = 0; o < n_out_; ++o) b_.grad[o] += go[o];
      for (std::size_t i = 0; i < n_in_; ++i) {
        const double* wrow = w_.value.data() + i * n_out_;
        double* gw = w_.grad.data() + i * n_out_;
        double acc = 0.0;
        const double xi = in[i];
        for (std::size_t o = 0; o < n_out_; ++o) {
          gw[o] += xi * go[o];
          acc += wrow[o] * go[o];
        }
        dxi[i] = acc;
      }
    }
    return dx;
  }

  std::vector<Param*> params() override { return {&w_, &b_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

 private:
  std::size_t n_in_, n_out_;
  Param w_, b_;
  Tensor input_;
};

// ---------------------------------------------------------------------------

/// Per-feature batch normalization over [batch, features]. Train mode uses
/// batch statistics (biased variance) and updates the running averages with
/// running = momentum * running + (1 - momentum) * batch.
class BatchNorm final : public Layer {
 public:
  explicit BatchNorm(std::size_t n, double momentum = 0.9, double eps = 1e-5)
      : n_(n), momentum_(momentum), eps_(eps) {
    gamma_.name = "gamma";
    gamma_.value.assign(n, 1.0);
    beta_.name = "beta";
    beta_.value.assign(n, 0.0);
    gamma_.resize_grad();
    beta_.resize_grad();
    running_mean_.assign(n, 0.0);
    running_var_.assign(n, 1.0);
  }

  std::string kind() const override { return "batchnorm"; }
  double momentum() const { return momentum_; }
  double eps() const { return eps_; }

  Tensor forward(const Tensor& x, Mode mode, Rng*) override {
    if (x.per_row() != n_) throw Error(ErrorKind::ShapeMismatch, "batchnorm width mismatch");
    const std::size_t batch = x.batch();
    mode_ = mode;
    xhat_ = Tensor(x.shape);
    inv_std_.assign(n_, 0.0);
    Tensor y(x.shape);
    std::vector<double> mean(n_, 0.0), var(n_, 0.0);
    if (mode == Mode::Train && batch > 0) {
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t j = 0; j < n_; ++j) mean[j] += x.data[r * n_ + j];
      for (auto& m : mean) m /= static_cast<double>(batch);
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t j = 0; j < n_; ++j) {
          const double d = x.data[r * n_ + j] - mean[j];
          var[j] += d * d;
        }
      for (auto& v : var) v /= static_cast<double>(batch);
      for (std::size_t j = 0; j < n_; ++j) {
        running_mean_[j] = momentum_ * running_mean_[j] + (1.0 - momentum_) * mean[j];
        running_var_[j] = momentum_ * running_var_[j] + (1.0 - momentum_) * var[j];
      }
    } else {
      mean = running_mean_;
      var = running_var_;
    }
    for (std::size_t j = 0; j < n_; ++j) inv_std_[j] = 1.0 / std::sqrt(var[j] + eps_);
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t k = r * n_ + j;
        xhat_.data[k] = (x.data[k] - mean[j]) * inv_std_[j];
        y.data[k] = gamma_.value[j] * xhat_.data[k] + beta_.value[j];
      }
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    const std::size_t batch = g.batch();
    Tensor dx(g.shape);
    std::vector<double> sum_g(n_, 0.0), sum_gx(n_, 0.0);
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t k = r * n_ + j;
        sum_g[j] += g.data[k];
        sum_gx[j] += g.data[k] * xhat_.data[k];
      }
    }
    for (std::size_t j = 0; j < n_; ++j) {
      beta_.grad[j] += sum_g[j];
      gamma_.grad[j] += sum_gx[j];
    }
    const double m = static_cast<double>(batch);
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t k = r * n_ + j;
        const double scale = gamma_.value[j] * inv_std_[j];
        if (mode_ == Mode::Train) {
          dx.data[k] = scale * (g.data[k] - sum_g[j] / m - xhat_.data[k] * sum_gx[j] / m);
        } else {
          dx.data[k] = scale * g.data[k];
        }
      }
    }
    return dx;
  }

  std::vector<Param*> params() override { return {&gamma_, &beta_}; }
  std::vector<std::vector<double>*> state() override { return {&running_mean_, &running_var_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }

 private:
  std::size_t n_;
  double momentum_, eps_;
  Param gamma_, beta_;
  std::vector<double> running_mean_, running_var_;
  Mode mode_ = Mode::Eval;
  Tensor xhat_;
  std::vector<double> inv_std_;
};

// ---------------------------------------------------------------------------

enum class ActivationKind { Relu, Elu, Softmax };

class Activation final : public Layer {
 public:
  explicit Activation(ActivationKind k, double alpha = 1.0) : kind_(k), alpha_(alpha) {}

  std::string kind() const override {
    switch (kind_) {
      case ActivationKind::Relu: return "relu";
      case ActivationKind::Elu: return "elu";
      case ActivationKind::Softmax: return "softmax";
    }
    return "relu";
  }
  ActivationKind activation() const { return kind_; }
  double alpha() const { return alpha_; }

  Tensor forward(const Tensor& x, Mode, Rng*) override {
    Tensor y(x.shape);
    if (kind_ == ActivationKind::Softmax) {
      const std::size_t w = x.per_row();
      y.data = x.data;
      for (std::size_t r = 0; r < x.batch(); ++r) softmax_inplace(std::span(y.data.data() + r * w, w));
      output_ = y;
      return y;
    }
    deriv_.resize(x.data.size());
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      const auto vg = kind_ == ActivationKind::Relu ? relu(x.data[i]) : elu(x.data[i], alpha_);
      y.data[i] = vg.value;
      deriv_[i] = vg.grad;
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(g.shape);
    if (kind_ == ActivationKind::Softmax) {
      // dx_i = p_i (g_i - sum_j g_j p_j)
      const std::size_t w = g.per_row();
      for (std::size_t r = 0; r < g.batch(); ++r) {
        const double* p = output_.data.data() + r * w;
        const double* gr = g.data.data() + r * w;
        double dot = 0.0;
        for (std::size_t j = 0; j < w; ++j) dot += gr[j] * p[j];
        for (std::size_t j = 0; j < w; ++j) dx.data[r * w + j] = p[j] * (gr[j] - dot);
      }
      return dx;
    }
    for (std::size_t i = 0; i < g.data.size(); ++i) dx.data[i] = g.data[i] * deriv_[i];
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Activation>(*this); }

 private:
  ActivationKind kind_;
  double alpha_;
  std::vector<double> deriv_;
  Tensor output_;
};

// ---------------------------------------------------------------------------

/// Inverted dropout: kept units are scaled by 1 / (1 - rate) in training.
class Dropout final : public Layer {
 public:
  explicit Dropout(double rate) : rate_(rate) {}

  std::string kind() const override { return "dropout"; }
  double rate() const { return rate_; }

  Tensor forward(const Tensor& x, Mode mode, Rng* rng) override {
    if (mode == Mode::Eval || rate_ <= 0.0 || !rng) {
      mask_.assign(x.data.size(), 1.0);
      return x;
    }
    Tensor y(x.shape);
    mask_.resize(x.data.size());
    const double keep = 1.0 - rate_;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      mask_[i] = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
      y.data[i] = x.data[i] * mask_[i];
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(g.shape);
    for (std::size_t i = 0; i < g.data.size(); ++i) dx.data[i] = g.data[i] * mask_[i];
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }

 private:
  double rate_;
  std::vector<double> mask_;
};

// ---------------------------------------------------------------------------

/// Valid 1D convolution, stride 1. Input [batch, channels, length]; a rank-2
/// input [batch, length] is read as one channel. Output [batch, filters,
/// length - kernel + 1]. Kernel layout [filter][channel][tap].
class Conv1d final : public Layer {
 public:
  Conv1d(std::size_t in_channels, std::size_t filters, std::size_t kernel)
      : channels_(in_channels), filters_(filters), kernel_(kernel) {
    w_.name = "kernel";
    w_.value.assign(filters * in_channels * kernel, 0.0);
    w_.regularized = true;
    b_.name = "bias";
    b_.value.assign(filters, 0.0);
    w_.resize_grad();
    b_.resize_grad();
  }

  std::string kind() const override { return "conv1d"; }
  std::size_t channels() const { return channels_; }
  std::size_t filters() const { return filters_; }
  std::size_t kernel_width() const { return kernel_; }
  Param& kernel() { return w_; }

  Tensor forward(const Tensor& x, Mode, Rng*) override {
    const std::size_t batch = x.batch();
    const std::size_t len = x.per_row() / channels_;
    if (len * channels_ != x.per_row() || len < kernel_) {
      throw Error(ErrorKind::ShapeMismatch, "conv1d input too narrow or misshapen");
    }
    input_ = x;
    in_len_ = len;
    const std::size_t out_len = len - kernel_ + 1;
    Tensor y({batch, filters_, out_len});
    for (std::size_t r = 0; r < batch; ++r) {
      const double* in = x.data.data() + r * channels_ * len;
      for (std::size_t f = 0; f < filters_; ++f) {
        double* out = y.data.data() + (r * filters_ + f) * out_len;
        for (std::size_t t = 0; t < out_len; ++t) {
          double s = b_.value[f];
          for (std::size_t c = 0; c < channels_; ++c) {
            const double* wk = w_.value.data() + (f * channels_ + c) * kernel_;
            const double* xin = in + c * len + t;
            for (std::size_t k = 0; k < kernel_; ++k) s += wk[k] * xin[k];
          }
          out[t] = s;
        }
      }
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    const std::size_t batch = g.batch();
    const std::size_t len = in_len_;
    const std::size_t out_len = len - kernel_ + 1;
    Tensor dx(input_.shape);
    for (std::size_t r = 0; r < batch; ++r) {
      const double* in = input_.data.data() + r * channels_ * len;
      double* din = dx.data.data() + r * channels_ * len;
      for (std::size_t f = 0; f < filters_; ++f) {
        const double* go = g.data.data() + (r * filters_ + f) * out_len;
        for (std::size_t t = 0; t < out_len; ++t) {
          const double gv = go[t];
          b_.grad[f] += gv;
          for (std::size_t c = 0; c < channels_; ++c) {
            const double* wk = w_.value.data() + (f * channels_ + c) * kernel_;
            double* gw = w_.grad.data() + (f * channels_ + c) * kernel_;
            for (std::size_t k = 0; k < kernel_; ++k) {
              gw[k] += gv * in[c * len + t + k];
              din[c * len + t + k] += gv * wk[k];
            }
          }
        }
      }
    }
    return dx;
  }

  std::vector<Param*> params() override { return {&w_, &b_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1d>(*this); }

 private:
  std::size_t channels_, filters_, kernel_;
  Param w_, b_;
  Tensor input_;
  std::size_t in_len_ = 0;
};

// ---------------------------------------------------------------------------

/// Non-overlapping max pooling along the length axis of [batch, channels,
/// length]; output length floor(length / window). Ties pick the first
/// position.
class MaxPool1d final : public Layer {
 public:
  explicit MaxPool1d(std::size_t window) : window_(window) {}

  std::string kind() const override { return "maxpool1d"; }
  std::size_t window() const { return window_; }

  Tensor forward(const Tensor& x, Mode, Rng*) override {
    const std::size_t batch = x.batch();
    const std::size_t channels = x.shape.size() == 3 ? x.shape[1] : 1;
    const std::size_t len = x.per_row() / channels;
    const std::size_t out_len = len / window_;
    in_shape_ = x.shape;
    Tensor y({batch, channels, out_len});
    argmax_.assign(y.data.size(), 0);
    for (std::size_t rc = 0; rc < batch * channels; ++rc) {
      const double* in = x.data.data() + rc * len;
      for (std::size_t t = 0; t < out_len; ++t) {
        std::size_t best = t * window_;
        for (std::size_t k = 1; k < window_; ++k) {
          if (in[t * window_ + k] > in[best]) best = t * window_ + k;
        }
        y.data[rc * out_len + t] = in[best];
        argmax_[rc * out_len + t] = rc * len + best;
      }
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(in_shape_);
    for (std::size_t i = 0; i < g.data.size(); ++i) dx.data[argmax_[i]] += g.data[i];
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool1d>(*this); }

 private:
  std::size_t window_;
  std::vector<std::size_t> in_shape_;
  std::vector<std::size_t> argmax_;
};

// ---------------------------------------------------------------------------

class Flatten final : public Layer {
 public:
  std::string kind() const override { return "flatten"; }

  Tensor forward(const Tensor& x, Mode, Rng*) override {
    in_shape_ = x.shape;
    Tensor y;
    y.shape = {x.batch(), x.per_row()};
    y.data = x.data;
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx;
    dx.shape = in_shape_;
    dx.data = g.data;
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  std::vector<std::size_t> in_shape_;
};

}  // namespace iotids::nn
