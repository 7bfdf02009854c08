#pragma once

// Confusion matrices, classification metrics and report files.

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "iotids/error.hpp"
#include "iotids/labels.hpp"

namespace iotids {

/// counts[i][j]: rows of true class i predicted as j.
struct ConfusionMatrix {
  std::vector<std::vector<std::size_t>> counts;

  std::size_t classes() const { return counts.size(); }
  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& row : counts)
      for (auto c : row) t += c;
    return t;
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, std::size_t class_count) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorKind::LengthMismatch, "confusion: " + std::to_string(y_true.size()) + " labels vs " +
                                               std::to_string(y_pred.size()) + " predictions");
  }
  ConfusionMatrix cm{std::vector<std::vector<std::size_t>>(class_count, std::vector<std::size_t>(class_count, 0))};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto t = static_cast<std::size_t>(y_true[i]);
    const auto p = static_cast<std::size_t>(y_pred[i]);
    if (y_true[i] < 0 || y_pred[i] < 0 || t >= class_count || p >= class_count) {
      throw Error(ErrorKind::LengthMismatch, "confusion: label outside class range at row " + std::to_string(i));
    }
    ++cm.counts[t][p];
  }
  return cm;
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool flagged_zero_denominator = false;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

inline MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(ErrorKind::EmptyMatrix, "no evaluated rows");
  const std::size_t c = cm.classes();
  MetricsReport r;
  std::size_t trace = 0;
  for (std::size_t k = 0; k < c; ++k) trace += cm.counts[k][k];
  r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  r.per_class.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t col = 0, row = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += cm.counts[k][j];
      col += cm.counts[j][k];
    }
    const double tp = static_cast<double>(cm.counts[k][k]);
    auto& m = r.per_class[k];
    m.support = row;
    if (col > 0) m.precision = tp / static_cast<double>(col);
    else m.flagged_zero_denominator = true;
    if (row > 0) m.recall = tp / static_cast<double>(row);
    else m.flagged_zero_denominator = true;
    if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  r.macro_precision /= static_cast<double>(c);
  r.macro_recall /= static_cast<double>(c);
  r.macro_f1 /= static_cast<double>(c);
  return r;
}

/// A named table of numeric rows, written as CSV.
struct CurveTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline nlohmann::ordered_json metrics_json(const MetricsReport& m, Task task) {
  nlohmann::ordered_json j;
  j["task"] = task_name(task);
  j["accuracy"] = m.accuracy;
  j["macro_precision"] = m.macro_precision;
  j["macro_recall"] = m.macro_recall;
  j["macro_f1"] = m.macro_f1;
  auto names = class_names(task);
  j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < m.per_class.size(); ++k) {
    const auto& c = m.per_class[k];
    nlohmann::ordered_json e;
    e["class"] = k < names.size() ? names[k] : std::to_string(k);
    e["precision"] = c.precision;
    e["recall"] = c.recall;
    e["f1"] = c.f1;
    e["support"] = c.support;
    e["flagged_zero_denominator"] = c.flagged_zero_denominator;
    j["per_class"].push_back(std::move(e));
  }
  return j;
}

inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm, const std::vector<std::string>& names) {
  out << "true\\pred";
  for (std::size_t k = 0; k < cm.classes(); ++k) out << ',' << names.at(k);
  out << '\n';
  for (std::size_t i = 0; i < cm.classes(); ++i) {
    out << names.at(i);
    for (auto c : cm.counts[i]) out << ',' << c;
    out << '\n';
  }
}

inline std::string format_number(double v) {
  return nlohmann::json(v).dump();
}

inline void write_curve_csv(std::ostream& out, const CurveTable& curve) {
  for (std::size_t i = 0; i < curve.columns.size(); ++i) out << (i ? "," : "") << curve.columns[i];
  out << '\n';
  for (const auto& row : curve.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

inline std::ofstream open_for_write(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + p.string());
  return out;
}

/// Writes metrics.json, confusion.csv and <name>.csv per non-empty curve.
/// Returns the written paths in order.
inline std::vector<std::filesystem::path> export_report(const MetricsReport& metrics, const ConfusionMatrix& cm,
                                                        Task task, const std::vector<CurveTable>& curves,
                                                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + dir.string());
  std::vector<std::filesystem::path> written;
  {
    const auto p = dir / "metrics.json";
    auto out = open_for_write(p);
    out << metrics_json(metrics, task).dump(2) << '\n';
    written.push_back(p);
  }
  {
    const auto p = dir / "confusion.csv";
    auto out = open_for_write(p);
    write_confusion_csv(out, cm, class_names(task));
    written.push_back(p);
  }
  for (const auto& c : curves) {
    if (c.rows.empty()) continue;
    const auto p = dir / (c.name + ".csv");
    auto out = open_for_write(p);
    write_curve_csv(out, c);
    written.push_back(p);
  }
  return written;
}

}  // namespace iotids
