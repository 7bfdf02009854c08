#pragma once

// Hyperparameter parsing and model fitting by name.

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "iotids/metrics.hpp"
#include "iotids/models.hpp"
#include "iotids/neural/train.hpp"

namespace iotids {

inline const std::vector<std::string>& standalone_model_names() {
  static const std::vector<std::string> n{"rf", "gbm", "ada", "knn", "svm", "ann", "cnn"};
  return n;
}

inline std::vector<std::string> hybrid_members(Task task) {
  if (task == Task::Binary) return {"rf", "gbm", "svm", "knn"};
  return {"rf", "gbm", "ada"};
}

inline bool needs_validation(const std::string& name) { return name == "gbm" || name == "ann" || name == "cnn"; }

/// Seed stream for a model name, so every model draws independently of the
/// others and of the configured model list.
inline std::uint64_t model_seed(std::uint64_t seed, const std::string& name) {
  const auto& n = standalone_model_names();
  const auto it = std::find(n.begin(), n.end(), name);
  return derive_seed(seed, 100 + static_cast<std::uint64_t>(it - n.begin()));
}

namespace detail {

class HyperReader {
 public:
  HyperReader(const nlohmann::json& j, std::string model) : j_(j), model_(std::move(model)) {
    if (!j_.is_null() && !j_.is_object()) {
      throw Error(ErrorKind::ConfigInvalid, "hyperparameters for " + model_ + " must be an object");
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.push_back(key);
    if (j_.is_null() || !j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::ConfigInvalid, model_ + "." + key + " has the wrong type");
    }
  }

  void finish() const {
    if (j_.is_null()) return;
    for (const auto& [k, v] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
        throw Error(ErrorKind::ConfigInvalid, "unknown hyperparameter " + model_ + "." + k);
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string model_;
  std::vector<std::string> seen_;
};

inline void require_positive(std::size_t v, const std::string& what) {
  if (v == 0) throw Error(ErrorKind::ConfigInvalid, what + " must be >= 1");
}

}  // namespace detail

struct ModelHyper {
  ForestParams rf;
  GbmParams gbm;
  AdaParams ada;
  std::size_t knn_k = 5;
  SvmParams svm;
  nn::AnnOptions ann;
  nn::CnnOptions cnn;
  nn::TrainParams ann_train;
  nn::TrainParams cnn_train;
};

inline nn::TrainParams read_train_params(detail::HyperReader& r, nn::TrainParams p) {
  p.epochs = r.get("epochs", p.epochs);
  p.batch = r.get("batch", p.batch);
  p.patience = r.get("patience", p.patience);
  p.lr = r.get("lr", p.lr);
  detail::require_positive(p.epochs, "epochs");
  detail::require_positive(p.batch, "batch");
  detail::require_positive(p.patience, "patience");
  return p;
}

/// Reads the "hyperparameters" object; unknown models or keys are rejected.
inline ModelHyper parse_hyperparameters(const nlohmann::json& j) {
  ModelHyper h;
  h.ann_train.epochs = 30;
  h.cnn_train.epochs = 30;
  const nlohmann::json none;
  if (!j.is_null() && !j.is_object()) throw Error(ErrorKind::ConfigInvalid, "hyperparameters must be an object");
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      const auto& n = standalone_model_names();
      if (std::find(n.begin(), n.end(), k) == n.end()) {
        throw Error(ErrorKind::ConfigInvalid, "hyperparameters for unknown model '" + k + "'");
      }
    }
  }
  const auto section = [&](const char* name) -> const nlohmann::json& {
    return j.is_object() && j.contains(name) ? j.at(name) : none;
  };
  {
    detail::HyperReader r(section("rf"), "rf");
    h.rf.n_trees = r.get("n_trees", h.rf.n_trees);
    h.rf.max_depth = r.get("max_depth", h.rf.max_depth);
    h.rf.min_samples_leaf = r.get("min_samples_leaf", h.rf.min_samples_leaf);
    h.rf.features_per_split = r.get("features_per_split", h.rf.features_per_split);
    h.rf.bootstrap = r.get("bootstrap", h.rf.bootstrap);
    r.finish();
    detail::require_positive(h.rf.n_trees, "rf.n_trees");
    detail::require_positive(h.rf.min_samples_leaf, "rf.min_samples_leaf");
  }
  {
    detail::HyperReader r(section("gbm"), "gbm");
    h.gbm.max_rounds = r.get("max_rounds", h.gbm.max_rounds);
    h.gbm.learning_rate = r.get("learning_rate", h.gbm.learning_rate);
    h.gbm.max_depth = r.get("max_depth", h.gbm.max_depth);
    h.gbm.lambda_leaf = r.get("lambda_leaf", h.gbm.lambda_leaf);
    h.gbm.patience = r.get("patience", h.gbm.patience);
    h.gbm.min_samples_leaf = r.get("min_samples_leaf", h.gbm.min_samples_leaf);
    r.finish();
    detail::require_positive(h.gbm.max_rounds, "gbm.max_rounds");
    detail::require_positive(h.gbm.patience, "gbm.patience");
    if (!(h.gbm.learning_rate > 0.0)) throw Error(ErrorKind::ConfigInvalid, "gbm.learning_rate must be > 0");
    if (h.gbm.lambda_leaf < 0.0) throw Error(ErrorKind::ConfigInvalid, "gbm.lambda_leaf must be >= 0");
  }
  {
    detail::HyperReader r(section("ada"), "ada");
    h.ada.n_rounds = r.get("n_rounds", h.ada.n_rounds);
    h.ada.weak_depth = r.get("weak_depth", h.ada.weak_depth);
    r.finish();
    detail::require_positive(h.ada.n_rounds, "ada.n_rounds");
  }
  {
    detail::HyperReader r(section("knn"), "knn");
    h.knn_k = r.get("k", h.knn_k);
    r.finish();
    detail::require_positive(h.knn_k, "knn.k");
  }
  {
    detail::HyperReader r(section("svm"), "svm");
    h.svm.c = r.get("c", h.svm.c);
    h.svm.epochs = r.get("epochs", h.svm.epochs);
    h.svm.eta0 = r.get("eta0", h.svm.eta0);
    h.svm.decay = r.get("decay", h.svm.decay);
    r.finish();
    if (!(h.svm.c > 0.0)) throw Error(ErrorKind::ConfigInvalid, "svm.c must be > 0");
  }
  {
    detail::HyperReader r(section("ann"), "ann");
    h.ann.hidden = r.get("hidden", h.ann.hidden);
    h.ann.dropout = r.get("dropout", h.ann.dropout);
    h.ann.elu_alpha = r.get("elu_alpha", h.ann.elu_alpha);
    h.ann.lambda1 = r.get("lambda1", h.ann.lambda1);
    h.ann.lambda2 = r.get("lambda2", h.ann.lambda2);
    h.ann_train = read_train_params(r, h.ann_train);
    r.finish();
  }
  {
    detail::HyperReader r(section("cnn"), "cnn");
    h.cnn.filters = r.get("filters", h.cnn.filters);
    h.cnn.kernel = r.get("kernel", h.cnn.kernel);
    h.cnn.pool = r.get("pool", h.cnn.pool);
    h.cnn.dropout = r.get("dropout", h.cnn.dropout);
    h.cnn.dense = r.get("dense", h.cnn.dense);
    h.cnn_train = read_train_params(r, h.cnn_train);
    r.finish();
  }
  for (double d : {h.ann.dropout, h.cnn.dropout}) {
    if (d < 0.0 || d >= 1.0) throw Error(ErrorKind::ConfigInvalid, "dropout must be in [0, 1)");
  }
  return h;
}

/// Training inputs for one model. Validation rows are required by gbm, ann
/// and cnn and ignored by the others.
struct FitData {
  const Matrix& x;
  std::span<const int> y;
  const Matrix& x_val;
  std::span<const int> y_val;
  Task task;
};

struct FitResult {
  Model model;
  std::vector<CurveTable> curves;
};

inline CurveTable gbm_curve_table(const TrainCurve& c) {
  CurveTable t{"curve", {"round", "train_loss", "val_loss"}, {}};
  for (std::size_t r = 0; r < c.train_loss.size(); ++r) {
    t.rows.push_back({static_cast<double>(r + 1), c.train_loss[r], c.val_loss[r]});
  }
  return t;
}

inline CurveTable network_curve_table(const nn::TrainingCurve& c) {
  CurveTable t{"curve", {"epoch", "train_loss", "val_loss", "val_accuracy"}, {}};
  for (std::size_t e = 0; e < c.train_loss.size(); ++e) {
    t.rows.push_back({static_cast<double>(e + 1), c.train_loss[e], c.val_loss[e], c.val_accuracy[e]});
  }
  return t;
}

/// Fits standalone model `name`. Errors carry the model name.
inline FitResult fit_model(const std::string& name, const ModelHyper& h, const FitData& d, std::uint64_t seed) {
  const std::size_t classes = class_count(d.task);
  const std::uint64_t s = model_seed(seed, name);
  try {
    if (d.x.rows == 0) throw Error(ErrorKind::EmptyInput, "no training rows");
    if (name == "rf") {
      auto p = h.rf;
      p.seed = s;
      return {{name, fit_random_forest(d.x, d.y, classes, p)}, {}};
    }
    if (name == "gbm") {
      auto [m, curve] = fit_gbm(d.x, d.y, d.x_val, d.y_val, classes, h.gbm);
      return {{name, std::move(m)}, {gbm_curve_table(curve)}};
    }
    if (name == "ada") return {{name, fit_adaboost(d.x, d.y, classes, h.ada)}, {}};
    if (name == "knn") {
      return {{name, fit_knn(d.x, std::vector<int>(d.y.begin(), d.y.end()), h.knn_k, classes)}, {}};
    }
    if (name == "svm") {
      if (d.task != Task::Binary) throw Error(ErrorKind::ShapeMismatch, "svm supports the binary task only");
      std::vector<int> pm(d.y.size());
      for (std::size_t i = 0; i < pm.size(); ++i) pm[i] = d.y[i] == 1 ? 1 : -1;
      auto p = h.svm;
      p.seed = s;
      return {{name, fit_linear_svm(d.x, pm, p)}, {}};
    }
    if (name == "ann" || name == "cnn") {
      auto spec = name == "ann" ? nn::build_ann(d.x.cols, classes, h.ann) : nn::build_cnn(d.x.cols, classes, h.cnn);
      auto net = std::make_shared<nn::Network>(spec, derive_seed(s, 0));
      auto tp = name == "ann" ? h.ann_train : h.cnn_train;
      tp.seed = derive_seed(s, 1);
      const auto curve = nn::train_network(*net, d.x, d.y, d.x_val, d.y_val, tp);
      return {{name, NeuralModel{std::move(spec), std::move(net)}}, {network_curve_table(curve)}};
    }
  } catch (const Error& e) {
    throw Error(e.kind(), "model " + name + ": " + e.message(), e.line());
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown model '" + name + "'");
}

inline VotingEnsemble<Model> compose_hybrid(Task task, const std::vector<Model>& members) {
  if (task == Task::Binary) return build_binary_hybrid(members.at(0), members.at(1), members.at(2), members.at(3));
  return build_multiclass_hybrid(members.at(0), members.at(1), members.at(2));
}

}  // namespace iotids
