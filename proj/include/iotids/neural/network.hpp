#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "iotids/math.hpp"
#include "iotids/neural/layers.hpp"

namespace iotids::nn {

struct LayerSpec {
  std::string kind;  // dense batchnorm elu relu softmax dropout conv1d maxpool1d flatten
  std::size_t units = 0;
  double rate = 0.0;
  double alpha = 1.0;
  std::size_t filters = 0;
  std::size_t kernel = 0;
  std::size_t window = 0;

  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  std::string name;
  std::size_t input_width = 0;
  std::size_t class_count = 2;
  std::vector<LayerSpec> layers;
  double lambda1 = 1e-5;
  double lambda2 = 1e-5;

  bool operator==(const NetworkSpec&) const = default;
};

struct AnnOptions {
  std::vector<std::size_t> hidden{128, 64, 32};
  double dropout = 0.2;
  double elu_alpha = 1.0;
  double lambda1 = 1e-5;
  double lambda2 = 1e-5;
};

/// [dense -> batchnorm -> ELU -> dropout] per hidden width, then
/// dense -> batchnorm -> softmax.
inline NetworkSpec build_ann(std::size_t input_width, std::size_t class_count, const AnnOptions& opt = {}) {
  if (input_width < 1 || class_count < 1) throw Error(ErrorKind::ShapeMismatch, "ann widths must be >= 1");
  NetworkSpec spec;
  spec.name = "ann";
  spec.input_width = input_width;
  spec.class_count = class_count;
  spec.lambda1 = opt.lambda1;
  spec.lambda2 = opt.lambda2;
  for (auto width : opt.hidden) {
    spec.layers.push_back({.kind = "dense", .units = width});
    spec.layers.push_back({.kind = "batchnorm"});
    spec.layers.push_back({.kind = "elu", .alpha = opt.elu_alpha});
    spec.layers.push_back({.kind = "dropout", .rate = opt.dropout});
  }
  spec.layers.push_back({.kind = "dense", .units = class_count});
  spec.layers.push_back({.kind = "batchnorm"});
  spec.layers.push_back({.kind = "softmax"});
  return spec;
}

struct CnnOptions {
  std::size_t filters = 32;
  std::size_t kernel = 3;
  std::size_t pool = 2;
  double dropout = 0.25;
  std::size_t dense = 64;
  double lambda1 = 1e-5;
  double lambda2 = 1e-5;
};

/// conv1d -> ReLU -> maxpool -> dropout -> flatten -> dense -> ReLU ->
/// dense -> softmax, reading the feature vector as a one-channel signal.
/// The pool window is capped at the convolution output length.
inline NetworkSpec build_cnn(std::size_t input_width, std::size_t class_count, const CnnOptions& opt = {}) {
  if (input_width < opt.kernel) {
    throw Error(ErrorKind::InputTooNarrow, "input width " + std::to_string(input_width) + " < kernel " +
                                               std::to_string(opt.kernel));
  }
  NetworkSpec spec;
  spec.name = "cnn";
  spec.input_width = input_width;
  spec.class_count = class_count;
  spec.lambda1 = opt.lambda1;
  spec.lambda2 = opt.lambda2;
  const std::size_t conv_len = input_width - opt.kernel + 1;
  spec.layers.push_back({.kind = "conv1d", .filters = opt.filters, .kernel = opt.kernel});
  spec.layers.push_back({.kind = "relu"});
  spec.layers.push_back({.kind = "maxpool1d", .window = std::min(opt.pool, conv_len)});
  spec.layers.push_back({.kind = "dropout", .rate = opt.dropout});
  spec.layers.push_back({.kind = "flatten"});
  spec.layers.push_back({.kind = "dense", .units = opt.dense});
  spec.layers.push_back({.kind = "relu"});
  spec.layers.push_back({.kind = "dense", .units = class_count});
  spec.layers.push_back({.kind = "softmax"});
  return spec;
}

class Network {
 public:
  Network() = default;

  /// Instantiates `spec`; kernels are Glorot-uniform from `seed`, biases 0.
  Network(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    Rng rng(seed);
    std::size_t channels = 1, length = spec_.input_width;
    bool rank3 = false;
    for (const auto& ls : spec_.layers) {
      const std::size_t width = channels * length;
      if (ls.kind == "dense") {
        auto d = std::make_unique<Dense>(width, ls.units);
        d->kernel().value = glorot_uniform(width, ls.units, rng);
        layers_.push_back(std::move(d));
        channels = 1;
        length = ls.units;
        rank3 = false;
      } else if (ls.kind == "batchnorm") {
        if (rank3) throw Error(ErrorKind::ShapeMismatch, "batchnorm expects [batch, features]");
        layers_.push_back(std::make_unique<BatchNorm>(width));
      } else if (ls.kind == "elu") {
        layers_.push_back(std::make_unique<Activation>(ActivationKind::Elu, ls.alpha));
      } else if (ls.kind == "relu") {
        layers_.push_back(std::make_unique<Activation>(ActivationKind::Relu));
      } else if (ls.kind == "softmax") {
        layers_.push_back(std::make_unique<Activation>(ActivationKind::Softmax));
      } else if (ls.kind == "dropout") {
        layers_.push_back(std::make_unique<Dropout>(ls.rate));
      } else if (ls.kind == "conv1d") {
        if (length < ls.kernel) throw Error(ErrorKind::InputTooNarrow, "conv1d kernel wider than input");
        auto c = std::make_unique<Conv1d>(channels, ls.filters, ls.kernel);
        c->kernel().value = glorot_uniform(channels * ls.kernel, ls.filters * ls.kernel, rng,
                                           c->kernel().value.size());
        layers_.push_back(std::move(c));
        channels = ls.filters;
        length = length - ls.kernel + 1;
        rank3 = true;
      } else if (ls.kind == "maxpool1d") {
        if (ls.window < 1) throw Error(ErrorKind::ShapeMismatch, "pool window must be >= 1");
        layers_.push_back(std::make_unique<MaxPool1d>(ls.window));
        length = length / ls.window;
      } else if (ls.kind == "flatten") {
        layers_.push_back(std::make_unique<Flatten>());
        length = channels * length;
        channels = 1;
        rank3 = false;
      } else {
        throw Error(ErrorKind::ShapeMismatch, "unknown layer kind '" + ls.kind + "'");
      }
    }
    if (spec_.layers.empty() || spec_.layers.back().kind != "softmax") {
      throw Error(ErrorKind::ShapeMismatch, "network must end in softmax");
    }
    if (channels * length != spec_.class_count) {
      throw Error(ErrorKind::ShapeMismatch, "output width does not match class count");
    }
  }

  Network(const Network& o) : spec_(o.spec_) {
    for (const auto& l : o.layers_) layers_.push_back(l->clone());
  }
  Network& operator=(const Network& o) {
    if (this != &o) {
      Network tmp(o);
      std::swap(spec_, tmp.spec_);
      std::swap(layers_, tmp.layers_);
    }
    return *this;
  }
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const NetworkSpec& spec() const { return spec_; }
  std::size_t input_width() const { return spec_.input_width; }
  std::size_t class_count() const { return spec_.class_count; }
  std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }

  std::vector<Param*> params() {
    std::vector<Param*> out;
    for (auto& l : layers_)
      for (auto* p : l->params()) out.push_back(p);
    return out;
  }

  std::vector<std::vector<double>*> state() {
    std::vector<std::vector<double>*> out;
    for (auto& l : layers_)
      for (auto* s : l->state()) out.push_back(s);
    return out;
  }

  /// All parameter values followed by all state arrays, in layer order.
  std::vector<std::vector<double>> arrays() {
    std::vector<std::vector<double>> out;
    for (auto* p : params()) out.push_back(p->value);
    for (auto* s : state()) out.push_back(*s);
    return out;
  }

  void set_arrays(const std::vector<std::vector<double>>& arrays) {
    auto ps = params();
    auto ss = state();
    if (arrays.size() != ps.size() + ss.size()) throw Error(ErrorKind::ShapeMismatch, "array count mismatch");
    std::size_t i = 0;
    for (auto* p : ps) {
      if (arrays[i].size() != p->value.size()) throw Error(ErrorKind::ShapeMismatch, "array size mismatch");
      p->value = arrays[i++];
    }
    for (auto* s : ss) {
      if (arrays[i].size() != s->size()) throw Error(ErrorKind::ShapeMismatch, "array size mismatch");
      *s = arrays[i++];
    }
  }

  void zero_grad() {
    for (auto* p : params()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  }

  /// Output probabilities [batch, classes].
  Tensor forward(const Tensor& x, Mode mode, Rng* rng = nullptr) {
    if (x.per_row() != spec_.input_width) {
      throw Error(ErrorKind::ShapeMismatch, "network expects width " + std::to_string(spec_.input_width));
    }
    Tensor h = x;
    for (auto& l : layers_) h = l->forward(h, mode, rng);
    return h;
  }

  /// Backward pass given dL/d(logits) (the softmax input); the softmax
  /// layer itself is skipped.
  void backward_from_logits(const Tensor& grad_logits) {
    Tensor g = grad_logits;
    for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
  }

  /// Backward pass given dL/d(probabilities), through the softmax Jacobian.
  void backward_from_probabilities(const Tensor& grad_probs) {
    Tensor g = grad_probs;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  }

  double penalty() {
    double total = 0.0;
    for (auto* p : params())
      if (p->regularized) total += elastic_net_value(p->value, spec_.lambda1, spec_.lambda2);
    return total;
  }

  void add_penalty_grad() {
    for (auto* p : params())
      if (p->regularized) elastic_net_grad(p->value, spec_.lambda1, spec_.lambda2, p->grad);
  }

  /// Mean cross-entropy over the batch plus the elastic-net penalty. When
  /// `backprop` is set, parameter gradients of that loss are accumulated.
  double loss(const Tensor& x, std::span<const int> y, Mode mode, Rng* rng, bool backprop) {
    const Tensor p = forward(x, mode, rng);
    const std::size_t batch = p.batch();
    const std::size_t c = spec_.class_count;
    double total = 0.0;
    Tensor g({batch, c});
    for (std::size_t r = 0; r < batch; ++r) {
      const auto row = std::span(p.data.data() + r * c, c);
      total += cross_entropy_at(row, static_cast<std::size_t>(y[r]));
      for (std::size_t k = 0; k < c; ++k) {
        g.data[r * c + k] = (row[k] - (static_cast<std::size_t>(y[r]) == k ? 1.0 : 0.0)) / static_cast<double>(batch);
      }
    }
    if (backprop) {
      backward_from_logits(g);
      add_penalty_grad();
    }
    return total / static_cast<double>(batch) + penalty();
  }

  Matrix predict_proba(const Matrix& x, std::size_t chunk = 1024) {
    require_width(x, spec_.input_width, spec_.name.c_str());
    Matrix out(x.rows, spec_.class_count);
    for (std::size_t start = 0; start < x.rows; start += chunk) {
      const std::size_t n = std::min(chunk, x.rows - start);
      Tensor t({n, x.cols});
      std::copy(x.data.begin() + static_cast<std::ptrdiff_t>(start * x.cols),
                x.data.begin() + static_cast<std::ptrdiff_t>((start + n) * x.cols), t.data.begin());
      const Tensor p = forward(t, Mode::Eval);
      std::copy(p.data.begin(), p.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(start * spec_.class_count));
    }
    return out;
  }

  std::vector<int> predict(const Matrix& x) {
    const auto p = predict_proba(x);
    std::vector<int> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = argmax(p.row(i));
    return out;
  }

 private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Parameter shapes of the trainable layers, for inspection.
inline std::vector<std::size_t> parameter_sizes(Network& net) {
  std::vector<std::size_t> out;
  for (auto* p : net.params()) out.push_back(p->value.size());
  return out;
}

}  // namespace iotids::nn
