#pragma once

// End-to-end commands: synth, train, evaluate, predict, importance.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iotids/hash.hpp"
#include "iotids/log.hpp"
#include "iotids/split_cv.hpp"
#include "iotids/synth.hpp"
#include "iotids/training.hpp"

namespace iotids {

namespace fs = std::filesystem;

inline constexpr int kConfigVersion = 1;

/// Process exit code for an error: 2 config, 3 data, 4 model.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid:
    case ErrorKind::BadFractions:
    case ErrorKind::BadK:
      return 2;
    case ErrorKind::MalformedHeader:
    case ErrorKind::ColumnCountMismatch:
    case ErrorKind::BadNumeric:
    case ErrorKind::UnknownBinaryLabel:
    case ErrorKind::EmptyClass:
    case ErrorKind::BadIpSyntax:
    case ErrorKind::TooFewRows:
    case ErrorKind::EmptyInput:
    case ErrorKind::EmptyMatrix:
    case ErrorKind::IoFailure:
    case ErrorKind::DataUnparseable:
      return 3;
    default:
      return 4;
  }
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  Task task = Task::Binary;
  std::vector<std::string> models;
  nlohmann::json hyperparameters = nlohmann::json::object();
  ModelHyper hyper;
  Fractions split;
  std::size_t cv_folds = 0;
  std::size_t per_class = 0;  // 0 = every row of the task
  std::uint64_t seed = 0;
  std::optional<std::string> cidr_table;
  std::size_t expected_width = 0;  // 0 = unchecked
};

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  static const std::vector<std::string> known{"config_version", "task",     "models", "hyperparameters",
                                              "split",          "cv_folds", "per_class", "seed",
                                              "cidr_table",     "expected_width"};
  if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw Error(ErrorKind::ConfigInvalid, "unknown config key '" + k + "'");
    }
  }
  ExperimentConfig c;
  try {
    if (j.at("config_version").get<int>() != kConfigVersion) {
      throw Error(ErrorKind::ConfigInvalid, "config_version must be " + std::to_string(kConfigVersion));
    }
    const auto task = parse_task(j.at("task").get<std::string>());
    if (!task) throw Error(ErrorKind::ConfigInvalid, "task must be binary or multiclass");
    c.task = *task;
    c.models = j.at("models").get<std::vector<std::string>>();
    if (!j.contains("seed")) throw Error(ErrorKind::ConfigInvalid, "seed is required");
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("hyperparameters")) c.hyperparameters = j.at("hyperparameters");
    if (j.contains("split")) {
      const auto& s = j.at("split");
      for (const auto& [k, v] : s.items()) {
        if (k != "train" && k != "test" && k != "val") {
          throw Error(ErrorKind::ConfigInvalid, "unknown split key '" + k + "'");
        }
      }
      c.split.train = s.at("train").get<double>();
      c.split.test = s.at("test").get<double>();
      c.split.val = s.value("val", 0.0);
    }
    c.cv_folds = j.value("cv_folds", std::size_t{0});
    c.per_class = j.value("per_class", std::size_t{0});
    if (j.contains("cidr_table") && !j.at("cidr_table").is_null()) c.cidr_table = j.at("cidr_table").get<std::string>();
    c.expected_width = j.value("expected_width", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config: ") + e.what());
  }
  const double sum = c.split.train + c.split.test + c.split.val;
  if (c.split.train <= 0.0 || c.split.test < 0.0 || c.split.val < 0.0 || std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::ConfigInvalid, "split fractions must be non-negative, train > 0, and sum to 1");
  }
  if (c.cv_folds == 1) throw Error(ErrorKind::ConfigInvalid, "cv_folds must be 0 or >= 2");
  if (c.models.empty()) throw Error(ErrorKind::ConfigInvalid, "models must not be empty");
  for (std::size_t i = 0; i < c.models.size(); ++i) {
    const auto& m = c.models[i];
    const auto& n = standalone_model_names();
    if (m != "hybrid" && std::find(n.begin(), n.end(), m) == n.end()) {
      throw Error(ErrorKind::ConfigInvalid, "unknown model '" + m + "'");
    }
    if (std::find(c.models.begin(), c.models.begin() + static_cast<std::ptrdiff_t>(i), m) !=
        c.models.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw Error(ErrorKind::ConfigInvalid, "model '" + m + "' listed twice");
    }
    if (m == "svm" && c.task != Task::Binary) {
      throw Error(ErrorKind::ConfigInvalid, "svm is available for the binary task only");
    }
  }
  c.hyper = parse_hyperparameters(c.hyperparameters);
  return c;
}

inline nlohmann::json read_json_file(const fs::path& p, ErrorKind kind) {
  std::ifstream in(p);
  if (!in) throw Error(kind, "cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(kind, p.string() + ": " + e.what());
  }
}

inline ExperimentConfig load_config(const fs::path& p) {
  auto c = parse_config(read_json_file(p, ErrorKind::ConfigInvalid));
  if (c.cidr_table && fs::path(*c.cidr_table).is_relative()) {
    c.cidr_table = (p.parent_path() / *c.cidr_table).string();
  }
  return c;
}

/// Normalized config as recorded in the manifest; paths reduced to basenames.
inline nlohmann::json config_snapshot(const ExperimentConfig& c) {
  nlohmann::json j;
  j["config_version"] = kConfigVersion;
  j["task"] = task_name(c.task);
  j["models"] = c.models;
  j["hyperparameters"] = c.hyperparameters;
  j["split"] = {{"train", c.split.train}, {"test", c.split.test}, {"val", c.split.val}};
  j["cv_folds"] = c.cv_folds;
  j["per_class"] = c.per_class;
  j["seed"] = c.seed;
  j["cidr_table"] = c.cidr_table ? nlohmann::json(fs::path(*c.cidr_table).filename().string()) : nlohmann::json();
  j["expected_width"] = c.expected_width;
  return j;
}

// ---------------------------------------------------------------------------
// Data loading

struct SourceFile {
  std::string name;
  std::string sha256;
};

struct LoadedLogs {
  std::vector<RawFlowRecord> records;
  std::vector<SourceFile> sources;
  bool labeled = true;
};

/// Reads one log file, or every regular file in a directory in name order.
/// Parse failures are reported as DataUnparseable naming the file.
inline LoadedLogs load_logs(const fs::path& path) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().filename().string().front() != '.') files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::DataUnparseable, "no log files in " + path.string());
  } else if (fs::is_regular_file(path, ec)) {
    files.push_back(path);
  } else {
    throw Error(ErrorKind::DataUnparseable, "no such file or directory: " + path.string());
  }
  LoadedLogs out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw Error(ErrorKind::DataUnparseable, "cannot open " + f.string());
    try {
      auto parsed = parse_conn_log(in);
      if (!parsed.records.empty()) out.labeled = out.labeled && parsed.labeled;
      for (auto& r : parsed.records) out.records.push_back(std::move(r));
    } catch (const Error& e) {
      throw Error(ErrorKind::DataUnparseable, f.filename().string() + ": " + std::string(to_string(e.kind())) +
                                                  ": " + e.message(),
                  e.line());
    }
    out.sources.push_back({f.filename().string(), sha256_file(f)});
  }
  return out;
}

inline std::vector<std::string> source_names(const LoadedLogs& logs) {
  std::vector<std::string> out;
  for (const auto& s : logs.sources) out.push_back(s.name);
  return out;
}

/// Rows of `ds` that belong to `task` (multiclass drops unmapped details).
inline Dataset filter_task(const Dataset& ds, Task task) {
  Dataset out;
  out.provenance = ds.provenance;
  for (const auto& row : ds.rows) {
    if (class_index(row.label, task)) out.rows.push_back(row);
  }
  return out;
}

inline Dataset subset(const Dataset& ds, std::span<const std::size_t> idx) {
  Dataset out;
  out.provenance = ds.provenance;
  out.rows.reserve(idx.size());
  for (auto i : idx) out.rows.push_back(ds.rows[i]);
  return out;
}

inline std::vector<int> labels_of(const FeatureMatrix& fm, Task task) {
  std::vector<int> y;
  y.reserve(fm.labels.size());
  for (const auto& l : fm.labels) y.push_back(class_index(l, task).value_or(-1));
  return y;
}

// ---------------------------------------------------------------------------
// Leakage-safe preprocessing

/// Ordered record of which partition each preprocessing step touched.
struct PartitionLog {
  struct Event {
    std::string action;  // "fit" or "transform"
    std::string partition;
  };
  std::vector<Event> events;

  void record(std::string action, std::string partition) {
    events.push_back({std::move(action), std::move(partition)});
  }

  /// True when every fit event precedes every access to a partition other
  /// than train.
  bool fits_before_other_partitions() const {
    std::size_t last_fit = 0, first_other = events.size();
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (events[i].action == "fit") last_fit = i;
      if (events[i].partition != "train" && first_other == events.size()) first_other = i;
      if (events[i].action == "fit" && events[i].partition != "train") return false;
    }
    return first_other == events.size() || last_fit < first_other;
  }
};

struct PreparedData {
  PreprocessState state;
  FeatureMatrix train, test, val;
  std::vector<int> y_train, y_test, y_val;
};

/// Fits the vocabulary and scaler on `train` alone, then transforms every
/// partition with the fitted state.
inline PreparedData prepare_partitions(const Dataset& train, const Dataset& test, const Dataset& val, Task task,
                                       const CidrTable& cidr, PartitionLog* log = nullptr) {
  const auto note = [&](const char* a, const char* p) {
    if (log) log->record(a, p);
  };
  PreparedData d;
  d.state.task = task;
  for (const auto& e : cidr.entries()) d.state.cidr.emplace_back(e.cidr, e.country);
  note("fit", "train");
  d.state.vocabulary = fit_vocabulary(train, cidr);
  auto raw = build_feature_matrix(train, cidr, d.state.vocabulary);
  d.state.scaler = fit_min_max(raw.values, "train");
  note("transform", "train");
  d.train = std::move(raw);
  d.train.values = transform_min_max(d.state.scaler, std::move(d.train.values));
  note("transform", "test");
  d.test = build_feature_matrix(test, cidr, d.state.vocabulary, &d.state.scaler);
  note("transform", "val");
  d.val = build_feature_matrix(val, cidr, d.state.vocabulary, &d.state.scaler);
  d.y_train = labels_of(d.train, task);
  d.y_test = labels_of(d.test, task);
  d.y_val = labels_of(d.val, task);
  return d;
}

/// Early-stopping rows for models that need them: the validation partition
/// when present, otherwise a stratified tenth carved from train.
struct EarlyStopSplit {
  Matrix x_fit, x_stop;
  std::vector<int> y_fit, y_stop;
};

inline EarlyStopSplit early_stop_split(const Matrix& x, std::span<const int> y, std::size_t classes,
                                       std::uint64_t seed) {
  const auto s = stratified_split(y, classes, Fractions{0.9, 0.0, 0.1}, seed);
  EarlyStopSplit out;
  out.x_fit = take_rows(x, s.train);
  out.x_stop = take_rows(x, s.val);
  for (auto i : s.train) out.y_fit.push_back(y[i]);
  for (auto i : s.val) out.y_stop.push_back(y[i]);
  return out;
}

inline FitResult fit_with_stopping(const std::string& name, const ExperimentConfig& cfg, const Matrix& x,
                                   std::span<const int> y, const Matrix& x_val, std::span<const int> y_val) {
  if (needs_validation(name) && x_val.rows == 0) {
    const auto es = early_stop_split(x, y, class_count(cfg.task), derive_seed(cfg.seed, 2));
    return fit_model(name, cfg.hyper, {es.x_fit, es.y_fit, es.x_stop, es.y_stop, cfg.task}, cfg.seed);
  }
  return fit_model(name, cfg.hyper, {x, y, x_val, y_val, cfg.task}, cfg.seed);
}

// ---------------------------------------------------------------------------
// Output helpers

inline void write_text(const fs::path& p, const std::string& text) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + p.string());
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

inline void write_model_dir(const fs::path& dir, const TrainedModel& model, const PreprocessState& state) {
  write_json(dir / "model.json", persist::trained_json(model));
  write_json(dir / "preprocess.json", persist::preprocess_json(state));
}

struct LoadedModel {
  TrainedModel model;
  PreprocessState state;
};

/// Reads RUN_DIR/<model>. Any failure is a ModelDataMismatch.
inline LoadedModel load_model_dir(const fs::path& dir) {
  try {
    LoadedModel m{persist::trained_from(read_json_file(dir / "model.json", ErrorKind::ModelDataMismatch)),
                  persist::preprocess_from(read_json_file(dir / "preprocess.json", ErrorKind::ModelDataMismatch))};
    if (m.model.width() != m.state.schema().width()) {
      throw Error(ErrorKind::ModelDataMismatch, "model width " + std::to_string(m.model.width()) +
                                                    " != preprocessing width " +
                                                    std::to_string(m.state.schema().width()));
    }
    if (m.model.classes() != class_count(m.state.task)) {
      throw Error(ErrorKind::ModelDataMismatch, "model classes disagree with task");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelDataMismatch, dir.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ModelDataMismatch) throw;
    throw Error(ErrorKind::ModelDataMismatch, dir.string() + ": " + e.message());
  }
}

// ---------------------------------------------------------------------------
// Commands

inline fs::path cmd_synth(const fs::path& spec_path, const fs::path& out_dir) {
  const auto spec = synth_spec_from_json(read_json_file(spec_path, ErrorKind::ConfigInvalid));
  const auto path = write_synthetic(spec, out_dir);
  log::info("wrote " + path.string());
  return path;
}

struct TrainOutcome {
  fs::path manifest;
  PartitionLog access;
  PreparedData data;
  std::map<std::string, MetricsReport> test_metrics;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline nlohmann::json cross_validate(const ExperimentConfig& cfg, const Dataset& train, const CidrTable& cidr) {
  const auto y = task_labels(train, cfg.task);
  const auto plan = k_fold(y, class_count(cfg.task), cfg.cv_folds, derive_seed(cfg.seed, 3));
  nlohmann::json out;
  out["k"] = cfg.cv_folds;
  out["models"] = nlohmann::json::object();
  std::map<std::string, std::vector<double>> scores;
  for (std::size_t f = 0; f < plan.k; ++f) {
    const auto [tr, va] = plan.pair(f);
    const auto d = prepare_partitions(subset(train, tr), subset(train, va), Dataset{}, cfg.task, cidr);
    std::map<std::string, Model> fitted;
    const auto get = [&](const std::string& name) -> const Model& {
      auto it = fitted.find(name);
      if (it == fitted.end()) {
        it = fitted.emplace(name, fit_with_stopping(name, cfg, d.train.values, d.y_train, d.val.values, d.y_val).model)
                 .first;
      }
      return it->second;
    };
    for (const auto& name : cfg.models) {
      std::vector<int> pred;
      if (name == "hybrid") {
        std::vector<Model> members;
        for (const auto& m : hybrid_members(cfg.task)) members.push_back(get(m));
        pred = compose_hybrid(cfg.task, members).predict_labels(d.test.values);
      } else {
        pred = get(name).predict_labels(d.test.values);
      }
      scores[name].push_back(accuracy_of(d.y_test, pred));
    }
    log::debug("cv fold " + std::to_string(f + 1) + " done");
  }
  for (const auto& name : cfg.models) {
    out["models"][name] = {{"fold_accuracy", scores[name]}, {"mean", cv_mean(scores[name])}};
  }
  return out;
}

}  // namespace detail

/// Pipeline: ingest, impute, label, balance-sample, split, fit preprocessing
/// on train, transform partitions, optional cross-validation, train models,
/// compose the hybrid, evaluate on test, write artifacts and the manifest.
inline TrainOutcome cmd_train(const ExperimentConfig& cfg, const fs::path& data_dir, const fs::path& out_dir) {
  TrainOutcome outcome;
  const auto logs = load_logs(data_dir);
  if (!logs.labeled) throw Error(ErrorKind::DataUnparseable, "training data needs label columns");
  CidrTable cidr;
  std::optional<SourceFile> cidr_source;
  if (cfg.cidr_table) {
    try {
      cidr = CidrTable::load(*cfg.cidr_table);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigInvalid, "cidr_table: " + e.message(), e.line());
    }
    cidr_source = SourceFile{fs::path(*cfg.cidr_table).filename().string(), sha256_file(*cfg.cidr_table)};
  }

  Dataset all;
  try {
    all = filter_task(make_dataset(logs.records, source_names(logs)), cfg.task);
  } catch (const Error& e) {
    throw Error(ErrorKind::DataUnparseable, e.message(), e.line());
  }
  const Dataset ds = balance_sample(all, cfg.task, cfg.per_class ? cfg.per_class : all.size() + 1, cfg.seed);
  log::info("sampled " + std::to_string(ds.size()) + " rows");
  const auto labels = task_labels(ds, cfg.task);
  const auto split = stratified_split(labels, class_count(cfg.task), cfg.split, derive_seed(cfg.seed, 1));
  const auto train_ds = subset(ds, split.train);
  outcome.data = prepare_partitions(train_ds, subset(ds, split.test), subset(ds, split.val), cfg.task, cidr,
                                    &outcome.access);
  auto& d = outcome.data;
  validate_width(d.train.schema, cfg.expected_width);
  if (d.test.values.rows == 0) throw Error(ErrorKind::TooFewRows, "test partition is empty");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + out_dir.string());

  nlohmann::json timings = nlohmann::json::object();
  if (cfg.cv_folds >= 2) {
    const auto t0 = std::chrono::steady_clock::now();
    write_json(out_dir / "cv.json", detail::cross_validate(cfg, train_ds, cidr));
    timings["cross_validation"] = detail::seconds_since(t0);
  }

  std::map<std::string, Model> fitted;
  const auto evaluate_into = [&](const std::string& name, const TrainedModel& model,
                                 const std::vector<CurveTable>& curves) {
    const auto pred = model.predict_labels(d.test.values);
    const auto cm = confusion(d.y_test, pred, class_count(cfg.task));
    const auto metrics = compute_metrics(cm);
    const auto dir = out_dir / name;
    write_model_dir(dir, model, d.state);
    export_report(metrics, cm, cfg.task, curves, dir);
    outcome.test_metrics[name] = metrics;
    log::info(name + " test accuracy " + format_number(metrics.accuracy));
  };
  const auto fit_named = [&](const std::string& name) -> std::pair<const Model*, std::vector<CurveTable>> {
    if (auto it = fitted.find(name); it != fitted.end()) return {&it->second, {}};
    const auto t0 = std::chrono::steady_clock::now();
    auto r = fit_with_stopping(name, cfg, d.train.values, d.y_train, d.val.values, d.y_val);
    timings[name] = detail::seconds_since(t0);
    auto [it, ok] = fitted.emplace(name, std::move(r.model));
    return {&it->second, std::move(r.curves)};
  };

  for (const auto& name : cfg.models) {
    if (name == "hybrid") continue;
    auto [model, curves] = fit_named(name);
    evaluate_into(name, TrainedModel{*model}, curves);
  }
  if (std::find(cfg.models.begin(), cfg.models.end(), "hybrid") != cfg.models.end()) {
    std::vector<Model> members;
    for (const auto& m : hybrid_members(cfg.task)) members.push_back(*fit_named(m).first);
    evaluate_into("hybrid", TrainedModel{compose_hybrid(cfg.task, members)}, {});
  }

  write_json(out_dir / "timings.json", {{"seconds", timings}});

  nlohmann::json manifest;
  manifest["manifest_version"] = 1;
  manifest["config"] = config_snapshot(cfg);
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& s : logs.sources) sources.push_back({{"file", s.name}, {"sha256", s.sha256}});
  manifest["provenance"] = {
      {"sources", sources},
      {"cidr_table", cidr_source ? nlohmann::json{{"file", cidr_source->name}, {"sha256", cidr_source->sha256}}
                                 : nlohmann::json()},
      {"sample_seed", cfg.seed},
      {"rows_sampled", ds.size()},
      {"partition_rows", {{"train", split.train.size()}, {"test", split.test.size()}, {"val", split.val.size()}}}};
  std::vector<fs::path> outputs;
  for (const auto& e : fs::recursive_directory_iterator(out_dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), out_dir);
    if (rel == "manifest.json" || rel == "timings.json") continue;
    outputs.push_back(rel);
  }
  std::sort(outputs.begin(), outputs.end());
  nlohmann::json files = nlohmann::json::array();
  for (const auto& rel : outputs) {
    files.push_back({{"path", rel.generic_string()}, {"sha256", sha256_file(out_dir / rel)}});
  }
  manifest["outputs"] = files;
  manifest["timings_file"] = "timings.json";
  outcome.manifest = out_dir / "manifest.json";
  write_json(outcome.manifest, manifest);
  return outcome;
}

/// Labeled rows of `path` for the model's task, transformed with the stored
/// preprocessing state.
inline std::pair<FeatureMatrix, std::vector<int>> labeled_rows(const LoadedModel& m, const fs::path& path) {
  const auto logs = load_logs(path);
  if (!logs.records.empty() && !logs.labeled) throw Error(ErrorKind::DataUnparseable, "data has no label column");
  Dataset ds;
  try {
    ds = filter_task(make_dataset(logs.records, source_names(logs)), m.state.task);
  } catch (const Error& e) {
    throw Error(ErrorKind::DataUnparseable, e.message(), e.line());
  }
  EncodeWarnings warnings;
  auto fm = m.state.transform(ds, &warnings);
  if (warnings.total()) log::debug(std::to_string(warnings.total()) + " unseen category values");
  auto y = labels_of(fm, m.state.task);
  return {std::move(fm), std::move(y)};
}

struct EvaluateOutcome {
  MetricsReport metrics;
  ConfusionMatrix confusion;
  std::vector<int> predictions;
};

/// Writes the metrics JSON to `report` and the confusion CSV beside it.
inline EvaluateOutcome cmd_evaluate(const fs::path& model_dir, const fs::path& data, const fs::path& report) {
  const auto m = load_model_dir(model_dir);
  const auto [fm, y] = labeled_rows(m, data);
  EvaluateOutcome out;
  out.predictions = m.model.predict_labels(fm.values);
  out.confusion = confusion(y, out.predictions, class_count(m.state.task));
  out.metrics = compute_metrics(out.confusion);
  write_json(report, metrics_json(out.metrics, m.state.task));
  auto csv_path = report;
  csv_path.replace_extension(".confusion.csv");
  std::ostringstream csv;
  write_confusion_csv(csv, out.confusion, class_names(m.state.task));
  write_text(csv_path, csv.str());
  return out;
}

/// CSV "row_index,predicted_label" plus "p_<class>" columns when the model
/// gives probabilities. Label columns in the input are ignored.
inline std::size_t cmd_predict(const fs::path& model_dir, const fs::path& input, const fs::path& output) {
  const auto m = load_model_dir(model_dir);
  const auto logs = load_logs(input);
  Dataset ds;
  for (const auto& r : logs.records) ds.rows.push_back({impute_missing(r), ClassLabel{}});
  const auto fm = m.state.transform(ds);
  const auto labels = m.model.predict_labels(fm.values);
  const auto proba = m.model.predict_proba(fm.values);
  const auto names = class_names(m.state.task);
  std::ostringstream out;
  out << "row_index,predicted_label";
  if (proba) {
    for (const auto& n : names) out << ",p_" << n;
  }
  out << '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << ',' << names.at(static_cast<std::size_t>(labels[i]));
    if (proba) {
      for (std::size_t k = 0; k < names.size(); ++k) out << ',' << format_number((*proba)(i, k));
    }
    out << '\n';
  }
  write_text(output, out.str());
  return labels.size();
}

inline ImportanceReport cmd_importance(const fs::path& model_dir, const fs::path& data, std::size_t repeats,
                                       std::uint64_t seed, const fs::path& out_path) {
  if (repeats < 1) throw Error(ErrorKind::ConfigInvalid, "repeats must be >= 1");
  const auto m = load_model_dir(model_dir);
  const auto [fm, y] = labeled_rows(m, data);
  if (fm.values.rows == 0) throw Error(ErrorKind::EmptyMatrix, "no labeled rows for importance");
  const auto report = permutation_importance([&](const Matrix& x) { return m.model.predict_labels(x); },
                                             fm.values, y, repeats, seed, fm.schema.names());
  std::ostringstream out;
  write_importance_csv(out, report);
  write_text(out_path, out.str());
  return report;
}

}  // namespace iotids
