#pragma once

// Uniform wrapper over every trained model kind, and its JSON form.

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "iotids/ensemble.hpp"
#include "iotids/featurize.hpp"
#include "iotids/knn.hpp"
#include "iotids/neural/network.hpp"
#include "iotids/svm.hpp"
#include "iotids/trees/adaboost.hpp"
#include "iotids/trees/forest.hpp"
#include "iotids/trees/gbm.hpp"

namespace iotids {

using json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

struct NeuralModel {
  nn::NetworkSpec spec;
  std::shared_ptr<nn::Network> net;  // predict_proba mutates layer caches
};

using ModelImpl = std::variant<ForestModel, GbmModel, AdaModel, KnnModel, SvmModel, NeuralModel>;

/// One standalone model. SVM maps its -1/+1 output to classes 0/1.
struct Model {
  std::string name;
  ModelImpl impl;

  std::size_t width() const {
    return std::visit(
        [](const auto& m) -> std::size_t {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, KnnModel>) return m.x.cols;
          else if constexpr (std::is_same_v<T, SvmModel>) return m.w.size();
          else if constexpr (std::is_same_v<T, NeuralModel>) return m.spec.input_width;
          else return m.n_features;
        },
        impl);
  }

  std::size_t classes() const {
    return std::visit(
        [](const auto& m) -> std::size_t {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, SvmModel>) return 2;
          else if constexpr (std::is_same_v<T, NeuralModel>) return m.spec.class_count;
          else return m.class_count;
        },
        impl);
  }

  std::vector<int> predict_labels(const Matrix& x) const {
    return std::visit(
        [&](const auto& m) -> std::vector<int> {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, ForestModel>) return predict_forest(m, x).labels;
          else if constexpr (std::is_same_v<T, GbmModel>) return predict_gbm(m, x).labels;
          else if constexpr (std::is_same_v<T, AdaModel>) return predict_adaboost(m, x);
          else if constexpr (std::is_same_v<T, KnnModel>) return predict_knn(m, x);
          else if constexpr (std::is_same_v<T, SvmModel>) {
            auto labels = predict_svm(m, x).labels;
            for (auto& l : labels) l = l > 0 ? 1 : 0;
            return labels;
          } else {
            return m.net->predict(x);
          }
        },
        impl);
  }

  /// Class probabilities for gbm and the networks.
  std::optional<Matrix> predict_proba(const Matrix& x) const {
    if (const auto* g = std::get_if<GbmModel>(&impl)) return predict_gbm(*g, x).probabilities;
    if (const auto* n = std::get_if<NeuralModel>(&impl)) return n->net->predict_proba(x);
    return std::nullopt;
  }
};

/// A standalone model or a hybrid of standalone members.
struct TrainedModel {
  std::variant<Model, VotingEnsemble<Model>> v;

  std::string name() const {
    return std::holds_alternative<Model>(v) ? std::get<Model>(v).name : "hybrid";
  }
  std::size_t width() const { return std::visit([](const auto& m) { return m.width(); }, v); }
  std::size_t classes() const { return std::visit([](const auto& m) { return m.classes(); }, v); }
  std::vector<int> predict_labels(const Matrix& x) const {
    return std::visit([&](const auto& m) { return m.predict_labels(x); }, v);
  }
  std::optional<Matrix> predict_proba(const Matrix& x) const {
    if (const auto* m = std::get_if<Model>(&v)) return m->predict_proba(x);
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace persist {

inline json matrix_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

inline Matrix matrix_from(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols) throw Error(ErrorKind::ShapeMismatch, "stored matrix size mismatch");
  return m;
}

inline json tree_json(const DecisionTree& t) {
  std::vector<int> feature, left, right;
  std::vector<double> threshold;
  std::vector<std::vector<double>> value;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"n_features", t.n_features}, {"feature", feature}, {"threshold", threshold},
          {"left", left},               {"right", right},     {"value", value}};
}

inline DecisionTree tree_from(const json& j) {
  DecisionTree t;
  t.n_features = j.at("n_features").get<std::size_t>();
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<std::vector<double>>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n || n == 0) {
    throw Error(ErrorKind::ShapeMismatch, "stored tree arrays disagree");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0 && (left[i] < 0 || right[i] < 0 || static_cast<std::size_t>(left[i]) >= n ||
                            static_cast<std::size_t>(right[i]) >= n ||
                            static_cast<std::size_t>(feature[i]) >= t.n_features)) {
      throw Error(ErrorKind::ShapeMismatch, "stored tree has a dangling node");
    }
    t.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i]});
  }
  return t;
}

inline json trees_json(const std::vector<DecisionTree>& trees) {
  json a = json::array();
  for (const auto& t : trees) a.push_back(tree_json(t));
  return a;
}

inline std::vector<DecisionTree> trees_from(const json& j) {
  std::vector<DecisionTree> out;
  for (const auto& t : j) out.push_back(tree_from(t));
  return out;
}

inline json layer_json(const nn::LayerSpec& l) {
  return {{"kind", l.kind},       {"units", l.units},   {"rate", l.rate},    {"alpha", l.alpha},
          {"filters", l.filters}, {"kernel", l.kernel}, {"window", l.window}};
}

inline nn::LayerSpec layer_from(const json& j) {
  nn::LayerSpec l;
  l.kind = j.at("kind").get<std::string>();
  l.units = j.at("units").get<std::size_t>();
  l.rate = j.at("rate").get<double>();
  l.alpha = j.at("alpha").get<double>();
  l.filters = j.at("filters").get<std::size_t>();
  l.kernel = j.at("kernel").get<std::size_t>();
  l.window = j.at("window").get<std::size_t>();
  return l;
}

inline json spec_json(const nn::NetworkSpec& s) {
  json layers = json::array();
  for (const auto& l : s.layers) layers.push_back(layer_json(l));
  return {{"name", s.name},       {"input_width", s.input_width}, {"class_count", s.class_count},
          {"layers", layers},     {"lambda1", s.lambda1},         {"lambda2", s.lambda2}};
}

inline nn::NetworkSpec spec_from(const json& j) {
  nn::NetworkSpec s;
  s.name = j.at("name").get<std::string>();
  s.input_width = j.at("input_width").get<std::size_t>();
  s.class_count = j.at("class_count").get<std::size_t>();
  for (const auto& l : j.at("layers")) s.layers.push_back(layer_from(l));
  s.lambda1 = j.at("lambda1").get<double>();
  s.lambda2 = j.at("lambda2").get<double>();
  return s;
}

inline json model_body(const Model& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ForestModel>) {
          return {{"class_count", m.class_count},
                  {"n_features", m.n_features},
                  {"features_per_split", m.features_per_split},
                  {"tree_seeds", m.tree_seeds},
                  {"params",
                   {{"n_trees", m.params.n_trees},
                    {"max_depth", m.params.max_depth},
                    {"min_samples_leaf", m.params.min_samples_leaf},
                    {"features_per_split", m.params.features_per_split},
                    {"bootstrap", m.params.bootstrap},
                    {"seed", m.params.seed}}},
                  {"trees", trees_json(m.trees)}};
        } else if constexpr (std::is_same_v<T, GbmModel>) {
          json rounds = json::array();
          for (const auto& r : m.rounds) rounds.push_back(trees_json(r));
          return {{"class_count", m.class_count},
                  {"n_features", m.n_features},
                  {"learning_rate", m.learning_rate},
                  {"best_round", m.best_round},
                  {"params",
                   {{"max_rounds", m.params.max_rounds},
                    {"learning_rate", m.params.learning_rate},
                    {"max_depth", m.params.max_depth},
                    {"lambda_leaf", m.params.lambda_leaf},
                    {"patience", m.params.patience},
                    {"min_samples_leaf", m.params.min_samples_leaf}}},
                  {"rounds", rounds}};
        } else if constexpr (std::is_same_v<T, AdaModel>) {
          json stages = json::array();
          for (const auto& s : m.stages) stages.push_back({{"alpha", s.alpha}, {"tree", tree_json(s.tree)}});
          return {{"class_count", m.class_count},
                  {"n_features", m.n_features},
                  {"prior_class", m.prior_class},
                  {"params", {{"n_rounds", m.params.n_rounds}, {"weak_depth", m.params.weak_depth}}},
                  {"stages", stages}};
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          return {{"class_count", m.class_count}, {"k", m.k}, {"x", matrix_json(m.x)}, {"y", m.y}};
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          return {{"w", m.w},
                  {"b", m.b},
                  {"c", m.c},
                  {"epochs_trained", m.epochs_trained},
                  {"params",
                   {{"c", m.params.c},
                    {"epochs", m.params.epochs},
                    {"eta0", m.params.eta0},
                    {"decay", m.params.decay},
                    {"seed", m.params.seed}}}};
        } else {
          return {{"spec", spec_json(m.spec)}, {"arrays", m.net->arrays()}};
        }
      },
      model.impl);
}

inline json model_json(const Model& m) {
  return {{"format_version", kModelFormatVersion}, {"kind", m.name}, {"body", model_body(m)}};
}

inline Model model_from(const json& j) {
  if (j.value("format_version", 0) != kModelFormatVersion) {
    throw Error(ErrorKind::ShapeMismatch, "unsupported model format version");
  }
  Model out;
  out.name = j.at("kind").get<std::string>();
  const auto& b = j.at("body");
  if (out.name == "rf") {
    ForestModel m;
    m.class_count = b.at("class_count").get<std::size_t>();
    m.n_features = b.at("n_features").get<std::size_t>();
    m.features_per_split = b.at("features_per_split").get<std::size_t>();
    m.tree_seeds = b.at("tree_seeds").get<std::vector<std::uint64_t>>();
    const auto& p = b.at("params");
    m.params.n_trees = p.at("n_trees").get<std::size_t>();
    m.params.max_depth = p.at("max_depth").get<std::size_t>();
    m.params.min_samples_leaf = p.at("min_samples_leaf").get<std::size_t>();
    m.params.features_per_split = p.at("features_per_split").get<std::size_t>();
    m.params.bootstrap = p.at("bootstrap").get<bool>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.trees = trees_from(b.at("trees"));
    if (m.trees.empty()) throw Error(ErrorKind::ShapeMismatch, "stored forest has no trees");
    out.impl = std::move(m);
  } else if (out.name == "gbm") {
    GbmModel m;
    m.class_count = b.at("class_count").get<std::size_t>();
    m.n_features = b.at("n_features").get<std::size_t>();
    m.learning_rate = b.at("learning_rate").get<double>();
    m.best_round = b.at("best_round").get<std::size_t>();
    const auto& p = b.at("params");
    m.params.max_rounds = p.at("max_rounds").get<std::size_t>();
    m.params.learning_rate = p.at("learning_rate").get<double>();
    m.params.max_depth = p.at("max_depth").get<std::size_t>();
    m.params.lambda_leaf = p.at("lambda_leaf").get<double>();
    m.params.patience = p.at("patience").get<std::size_t>();
    m.params.min_samples_leaf = p.at("min_samples_leaf").get<std::size_t>();
    for (const auto& r : b.at("rounds")) {
      m.rounds.push_back(trees_from(r));
      if (m.rounds.back().size() != m.class_count) throw Error(ErrorKind::ShapeMismatch, "gbm round size");
    }
    out.impl = std::move(m);
  } else if (out.name == "ada") {
    AdaModel m;
    m.class_count = b.at("class_count").get<std::size_t>();
    m.n_features = b.at("n_features").get<std::size_t>();
    m.prior_class = b.at("prior_class").get<int>();
    m.params.n_rounds = b.at("params").at("n_rounds").get<std::size_t>();
    m.params.weak_depth = b.at("params").at("weak_depth").get<std::size_t>();
    for (const auto& s : b.at("stages")) m.stages.push_back({tree_from(s.at("tree")), s.at("alpha").get<double>()});
    out.impl = std::move(m);
  } else if (out.name == "knn") {
    KnnModel m;
    m.class_count = b.at("class_count").get<std::size_t>();
    m.k = b.at("k").get<std::size_t>();
    m.x = matrix_from(b.at("x"));
    m.y = b.at("y").get<std::vector<int>>();
    if (m.y.size() != m.x.rows) throw Error(ErrorKind::ShapeMismatch, "stored knn labels misaligned");
    out.impl = std::move(m);
  } else if (out.name == "svm") {
    SvmModel m;
    m.w = b.at("w").get<std::vector<double>>();
    m.b = b.at("b").get<double>();
    m.c = b.at("c").get<double>();
    m.epochs_trained = b.at("epochs_trained").get<std::size_t>();
    const auto& p = b.at("params");
    m.params.c = p.at("c").get<double>();
    m.params.epochs = p.at("epochs").get<std::size_t>();
    m.params.eta0 = p.at("eta0").get<double>();
    m.params.decay = p.at("decay").get<double>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    out.impl = std::move(m);
  } else if (out.name == "ann" || out.name == "cnn") {
    NeuralModel m;
    m.spec = spec_from(b.at("spec"));
    m.net = std::make_shared<nn::Network>(m.spec, 0);
    m.net->set_arrays(b.at("arrays").get<std::vector<std::vector<double>>>());
    out.impl = std::move(m);
  } else {
    throw Error(ErrorKind::ShapeMismatch, "unknown model kind '" + out.name + "'");
  }
  return out;
}

inline json trained_json(const TrainedModel& t) {
  if (const auto* m = std::get_if<Model>(&t.v)) return model_json(*m);
  const auto& ens = std::get<VotingEnsemble<Model>>(t.v);
  json members = json::array();
  for (const auto& m : ens.members) members.push_back(model_json(m));
  return {{"format_version", kModelFormatVersion},
          {"kind", "hybrid"},
          {"task", task_name(ens.task)},
          {"members", members}};
}

inline TrainedModel trained_from(const json& j) {
  if (j.at("kind").get<std::string>() != "hybrid") return {model_from(j)};
  if (j.value("format_version", 0) != kModelFormatVersion) {
    throw Error(ErrorKind::ShapeMismatch, "unsupported model format version");
  }
  const auto task = parse_task(j.at("task").get<std::string>());
  if (!task) throw Error(ErrorKind::ShapeMismatch, "stored hybrid has an unknown task");
  std::vector<Model> members;
  for (const auto& m : j.at("members")) members.push_back(model_from(m));
  if (*task == Task::Binary) {
    if (members.size() != 4) throw Error(ErrorKind::ShapeMismatch, "binary hybrid needs four members");
    return {build_binary_hybrid(members[0], members[1], members[2], members[3])};
  }
  if (members.size() != 3) throw Error(ErrorKind::ShapeMismatch, "multiclass hybrid needs three members");
  return {build_multiclass_hybrid(members[0], members[1], members[2])};
}

}  // namespace persist

// ---------------------------------------------------------------------------
// Preprocessing state bundled with each model

struct PreprocessState {
  Task task = Task::Binary;
  OneHotVocabulary vocabulary;
  MinMaxParams scaler;
  std::vector<std::pair<std::string, std::string>> cidr;  // (prefix, country)

  FeatureSchema schema() const { return make_schema(vocabulary); }

  CidrTable cidr_table() const {
    CidrTable t;
    for (const auto& [prefix, country] : cidr) t.add(prefix, country);
    return t;
  }

  /// Encodes and scales `ds` with the stored state; never refits.
  FeatureMatrix transform(const Dataset& ds, EncodeWarnings* warnings = nullptr) const {
    return build_feature_matrix(ds, cidr_table(), vocabulary, &scaler, warnings);
  }
};

namespace persist {

inline json preprocess_json(const PreprocessState& p) {
  json cidr = json::array();
  for (const auto& [prefix, country] : p.cidr) cidr.push_back({prefix, country});
  return {{"format_version", kModelFormatVersion},
          {"task", task_name(p.task)},
          {"vocabulary", {{"features", p.vocabulary.features}, {"categories", p.vocabulary.categories}}},
          {"scaler", {{"x_min", p.scaler.x_min}, {"x_max", p.scaler.x_max}, {"fitted_on", p.scaler.fitted_on}}},
          {"schema", p.schema().names()},
          {"cidr", cidr}};
}

inline PreprocessState preprocess_from(const json& j) {
  if (j.value("format_version", 0) != kModelFormatVersion) {
    throw Error(ErrorKind::ShapeMismatch, "unsupported preprocessing format version");
  }
  PreprocessState p;
  const auto task = parse_task(j.at("task").get<std::string>());
  if (!task) throw Error(ErrorKind::ShapeMismatch, "stored preprocessing has an unknown task");
  p.task = *task;
  p.vocabulary.features = j.at("vocabulary").at("features").get<std::vector<std::string>>();
  p.vocabulary.categories = j.at("vocabulary").at("categories").get<std::vector<std::vector<std::string>>>();
  p.scaler.x_min = j.at("scaler").at("x_min").get<std::vector<double>>();
  p.scaler.x_max = j.at("scaler").at("x_max").get<std::vector<double>>();
  p.scaler.fitted_on = j.at("scaler").at("fitted_on").get<std::string>();
  for (const auto& e : j.at("cidr")) p.cidr.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  if (p.schema().names() != j.at("schema").get<std::vector<std::string>>() ||
      p.scaler.x_min.size() != p.schema().width()) {
    throw Error(ErrorKind::ShapeMismatch, "stored schema disagrees with vocabulary");
  }
  return p;
}

}  // namespace persist

}  // namespace iotids
