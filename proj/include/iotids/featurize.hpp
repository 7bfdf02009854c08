#pragma once

// Feature engineering for labeled flows: IP scope/country derivation, one-hot
// vocabularies, train-only min-max scaling, and permutation importance.

#include <arpa/inet.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "iotids/error.hpp"
#include "iotids/flow_data.hpp"
#include "iotids/log.hpp"
#include "iotids/matrix.hpp"
#include "iotids/rng.hpp"

namespace iotids {

// ---------------------------------------------------------------------------
// IP addresses and CIDR prefixes

struct IpAddress {
  bool v6 = false;
  std::array<std::uint8_t, 16> bytes{};  // v4 uses the first four

  bool operator==(const IpAddress&) const = default;
};

inline std::optional<IpAddress> parse_ip(std::string_view text) {
  const std::string s(text);
  IpAddress ip;
  if (inet_pton(AF_INET, s.c_str(), ip.bytes.data()) == 1) return ip;
  ip.v6 = true;
  if (inet_pton(AF_INET6, s.c_str(), ip.bytes.data()) == 1) return ip;
  return std::nullopt;
}

struct Cidr {
  IpAddress network;
  int prefix_len = 0;

  bool contains(const IpAddress& ip) const {
    if (ip.v6 != network.v6) return false;
    int remaining = prefix_len;
    for (std::size_t i = 0; remaining > 0; ++i, remaining -= 8) {
      const int bits = std::min(remaining, 8);
      const auto mask = static_cast<std::uint8_t>(0xFF << (8 - bits));
      if ((ip.bytes[i] & mask) != (network.bytes[i] & mask)) return false;
    }
    return true;
  }
};

inline std::optional<Cidr> parse_cidr(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  const auto ip = parse_ip(text.substr(0, slash));
  if (!ip) return std::nullopt;
  const auto len_text = text.substr(slash + 1);
  int len = 0;
  const auto [p, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
  if (ec != std::errc{} || p != len_text.data() + len_text.size()) return std::nullopt;
  if (len < 0 || len > (ip->v6 ? 128 : 32)) return std::nullopt;
  return Cidr{*ip, len};
}

enum class IpScope { Private, Global };

/// Private ranges: RFC 1918, IPv6 unique-local, loopback, link-local.
inline const std::vector<Cidr>& private_ranges() {
  static const std::vector<Cidr> ranges = [] {
    std::vector<Cidr> out;
    for (auto text : {"10.0.0.0/8", "172.16.0.0/12", "192.168.0.0/16", "127.0.0.0/8",
                      "169.254.0.0/16", "fc00::/7", "::1/128", "fe80::/10"}) {
      out.push_back(*parse_cidr(text));
    }
    return out;
  }();
  return ranges;
}

inline IpScope ip_scope(const IpAddress& ip) {
  for (const auto& range : private_ranges()) {
    if (range.contains(ip)) return IpScope::Private;
  }
  return IpScope::Global;
}

struct CidrEntry {
  std::string cidr;
  Cidr prefix;
  std::string country;
};

/// Offline prefix-to-country table; lookups use longest-prefix match.
class CidrTable {
 public:
  CidrTable() = default;

  void add(std::string_view cidr, std::string country) {
    const auto parsed = parse_cidr(cidr);
    if (!parsed) throw Error(ErrorKind::BadIpSyntax, "bad CIDR '" + std::string(cidr) + "'");
    entries_.push_back({std::string(cidr), *parsed, std::move(country)});
  }

  std::string country(const IpAddress& ip) const {
    const CidrEntry* best = nullptr;
    for (const auto& e : entries_) {
      if (e.prefix.contains(ip) && (!best || e.prefix.prefix_len > best->prefix.prefix_len)) {
        best = &e;
      }
    }
    return best ? best->country : "unknown";
  }

  const std::vector<CidrEntry>& entries() const { return entries_; }

  /// CSV with header "cidr,country".
  static CidrTable parse(std::istream& in) {
    CidrTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (lineno == 1) {
        if (line != "cidr,country") {
          throw Error(ErrorKind::MalformedHeader, "CIDR table header must be 'cidr,country'", lineno);
        }
        continue;
      }
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw Error(ErrorKind::ColumnCountMismatch, "CIDR row needs two columns", lineno);
      }
      table.add(line.substr(0, comma), line.substr(comma + 1));
    }
    return table;
  }

  static CidrTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open CIDR table '" + path + "'");
    return parse(in);
  }

 private:
  std::vector<CidrEntry> entries_;
};

struct IpFeatures {
  IpScope orig_scope = IpScope::Private;
  IpScope resp_scope = IpScope::Private;
  std::string orig_country;
  std::string resp_country;
};

inline IpFeatures derive_ip_features(const RawFlowRecord& record, const CidrTable& table) {
  const auto orig = parse_ip(record.orig_h);
  if (!orig) throw Error(ErrorKind::BadIpSyntax, "orig_h '" + record.orig_h + "'");
  const auto resp = parse_ip(record.resp_h);
  if (!resp) throw Error(ErrorKind::BadIpSyntax, "resp_h '" + record.resp_h + "'");
  return {ip_scope(*orig), ip_scope(*resp), table.country(*orig), table.country(*resp)};
}

// ---------------------------------------------------------------------------
// One-hot encoding

struct OneHotVocabulary {
  std::vector<std::string> features;
  std::vector<std::vector<std::string>> categories;  // first-seen order per feature

  std::size_t width() const {
    std::size_t w = 0;
    for (const auto& c : categories) w += c.size();
    return w;
  }

  bool operator==(const OneHotVocabulary&) const = default;
};

/// `rows[i][f]` is the value of categorical feature f in row i.
inline OneHotVocabulary fit_one_hot(const std::vector<std::vector<std::string>>& rows,
                                    std::vector<std::string> features) {
  OneHotVocabulary vocab;
  vocab.categories.resize(features.size());
  vocab.features = std::move(features);
  for (const auto& row : rows) {
    for (std::size_t f = 0; f < vocab.features.size(); ++f) {
      auto& cats = vocab.categories[f];
      if (std::find(cats.begin(), cats.end(), row.at(f)) == cats.end()) cats.push_back(row[f]);
    }
  }
  return vocab;
}

/// Counts of category values not present in the vocabulary.
struct EncodeWarnings {
  std::map<std::pair<std::string, std::string>, std::size_t> unseen;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [k, v] : unseen) n += v;
    return n;
  }
};

/// Indicator block for `value` of feature `feature`. Unseen values give an
/// all-zero block and are recorded in `warnings`.
inline std::vector<double> encode_one_hot(const OneHotVocabulary& vocab, std::size_t feature,
                                          std::string_view value,
                                          EncodeWarnings* warnings = nullptr) {
  const auto& cats = vocab.categories.at(feature);
  std::vector<double> out(cats.size(), 0.0);
  const auto it = std::find(cats.begin(), cats.end(), value);
  if (it != cats.end()) {
    out[static_cast<std::size_t>(it - cats.begin())] = 1.0;
  } else if (warnings) {
    ++warnings->unseen[{vocab.features[feature], std::string(value)}];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Min-max scaling

struct MinMaxParams {
  std::vector<double> x_min;
  std::vector<double> x_max;
  std::string fitted_on;

  bool operator==(const MinMaxParams&) const = default;
};

inline MinMaxParams fit_min_max(const Matrix& train, std::string fitted_on = "train") {
  MinMaxParams p;
  p.fitted_on = std::move(fitted_on);
  p.x_min.assign(train.cols, 0.0);
  p.x_max.assign(train.cols, 0.0);
  for (std::size_t c = 0; c < train.cols; ++c) {
    if (train.rows == 0) continue;
    double lo = train(0, c);
    double hi = lo;
    for (std::size_t r = 1; r < train.rows; ++r) {
      lo = std::min(lo, train(r, c));
      hi = std::max(hi, train(r, c));
    }
    p.x_min[c] = lo;
    p.x_max[c] = hi;
  }
  return p;
}

/// X' = (X - min) / (max - min), clamped to [0, 1]; constant columns map to 0.
inline double scale_value(double x, double lo, double hi) {
  if (hi == lo) return 0.0;
  return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
}

inline Matrix transform_min_max(const MinMaxParams& params, Matrix m) {
  if (m.cols != params.x_min.size()) {
    throw Error(ErrorKind::ColumnMismatch, "scaler fitted on " + std::to_string(params.x_min.size()) +
                                               " columns, matrix has " + std::to_string(m.cols));
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      m(r, c) = scale_value(m(r, c), params.x_min[c], params.x_max[c]);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Schema and matrix assembly

enum class ColumnKind { Numeric, OneHot };

struct FeatureColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::string source;    // source feature for one-hot columns
  std::string category;  // category value for one-hot columns

  bool operator==(const FeatureColumn&) const = default;
};

struct DroppedColumn {
  std::string name;
  std::string reason;

  bool operator==(const DroppedColumn&) const = default;
};

struct FeatureSchema {
  std::vector<FeatureColumn> columns;
  std::vector<DroppedColumn> dropped;

  std::size_t width() const { return columns.size(); }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : columns) out.push_back(c.name);
    return out;
  }

  bool operator==(const FeatureSchema&) const = default;
};

inline const std::vector<std::string>& numeric_feature_names() {
  static const std::vector<std::string> names{
      "orig_p",       "resp_p",    "duration",      "orig_bytes", "resp_bytes",   "local_orig",
      "local_resp",   "missed_bytes", "orig_pkts",  "orig_ip_bytes", "resp_pkts", "resp_ip_bytes"};
  return names;
}

inline const std::vector<std::string>& ip_feature_names() {
  static const std::vector<std::string> names{"orig_ip_global", "resp_ip_global"};
  return names;
}

inline const std::vector<std::string>& categorical_feature_names() {
  static const std::vector<std::string> names{"proto", "service", "conn_state", "orig_country",
                                              "resp_country"};
  return names;
}

inline const std::vector<DroppedColumn>& dropped_columns() {
  static const std::vector<DroppedColumn> cols{
      {"orig_h", "raw IP address (scope and country engineered instead)"},
      {"resp_h", "raw IP address (scope and country engineered instead)"},
      {"uid", "identifier"},
      {"ts", "identifier"},
      {"tunnel_parents", "identifier"},
      {"history", "no permutation importance"}};
  return cols;
}

/// Column order: numeric fields, engineered IP scope flags, one-hot blocks.
/// Depends only on the vocabulary.
inline FeatureSchema make_schema(const OneHotVocabulary& vocab) {
  FeatureSchema schema;
  for (const auto& n : numeric_feature_names()) schema.columns.push_back({n, ColumnKind::Numeric, n, {}});
  for (const auto& n : ip_feature_names()) schema.columns.push_back({n, ColumnKind::Numeric, n, {}});
  for (std::size_t f = 0; f < vocab.features.size(); ++f) {
    for (const auto& cat : vocab.categories[f]) {
      schema.columns.push_back({vocab.features[f] + "=" + cat, ColumnKind::OneHot, vocab.features[f], cat});
    }
  }
  schema.dropped = dropped_columns();
  return schema;
}

inline std::vector<double> numeric_values(const RawFlowRecord& r) {
  const auto num = [](const auto& opt) { return opt ? static_cast<double>(*opt) : 0.0; };
  return {num(r.orig_p),       num(r.resp_p),    r.duration.value_or(0.0), num(r.orig_bytes),
          num(r.resp_bytes),   r.local_orig.value_or(false) ? 1.0 : 0.0,
          r.local_resp.value_or(false) ? 1.0 : 0.0,   num(r.missed_bytes),     num(r.orig_pkts),
          num(r.orig_ip_bytes), num(r.resp_pkts),     num(r.resp_ip_bytes)};
}

/// Values of the categorical features, in categorical_feature_names() order.
inline std::vector<std::string> categorical_values(const RawFlowRecord& r, const IpFeatures& ip) {
  return {std::string(proto_name(r.proto)), r.service.value_or("unknown"), r.conn_state,
          ip.orig_country, ip.resp_country};
}

inline OneHotVocabulary fit_vocabulary(const Dataset& train, const CidrTable& cidr) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(train.size());
  for (const auto& row : train.rows) {
    rows.push_back(categorical_values(row.record, derive_ip_features(row.record, cidr)));
  }
  return fit_one_hot(rows, categorical_feature_names());
}

struct FeatureMatrix {
  Matrix values;
  FeatureSchema schema;
  std::vector<ClassLabel> labels;
};

/// Assembles the matrix for `ds` under a fitted vocabulary. When `params` is
/// given the matrix is min-max scaled with it.
inline FeatureMatrix build_feature_matrix(const Dataset& ds, const CidrTable& cidr,
                                          const OneHotVocabulary& vocab,
                                          const MinMaxParams* params = nullptr,
                                          EncodeWarnings* warnings = nullptr) {
  FeatureMatrix fm;
  fm.schema = make_schema(vocab);
  const auto width = fm.schema.width();
  if (params && params->x_min.size() != width) {
    throw Error(ErrorKind::SchemaMismatch, "scaler width " + std::to_string(params->x_min.size()) +
                                               " != schema width " + std::to_string(width));
  }
  fm.values = Matrix(ds.size(), width);
  fm.labels.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& rec = ds.rows[i].record;
    const auto ip = derive_ip_features(rec, cidr);
    auto out = fm.values.row(i).begin();
    for (double v : numeric_values(rec)) *out++ = v;
    *out++ = ip.orig_scope == IpScope::Global ? 1.0 : 0.0;
    *out++ = ip.resp_scope == IpScope::Global ? 1.0 : 0.0;
    const auto cats = categorical_values(rec, ip);
    for (std::size_t f = 0; f < vocab.features.size(); ++f) {
      for (double v : encode_one_hot(vocab, f, cats[f], warnings)) *out++ = v;
    }
    fm.labels.push_back(ds.rows[i].label);
  }
  if (params) fm.values = transform_min_max(*params, std::move(fm.values));
  return fm;
}

/// Throws SchemaMismatch when `expected` is non-zero and differs from the
/// finalized width.
inline void validate_width(const FeatureSchema& schema, std::size_t expected) {
  if (expected != 0 && schema.width() != expected) {
    throw Error(ErrorKind::SchemaMismatch, "expected " + std::to_string(expected) +
                                               " features, schema has " +
                                               std::to_string(schema.width()));
  }
}

// ---------------------------------------------------------------------------
// Permutation importance

struct FeatureImportance {
  std::string feature;
  double mean = 0.0;
  std::vector<double> repeats;
};

struct ImportanceReport {
  std::vector<FeatureImportance> features;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  double base_accuracy = 0.0;
};

inline double accuracy_of(std::span<const int> truth, std::span<const int> pred) {
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == pred[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// Row permutation used to shuffle `feature` in `repeat`.
inline std::vector<std::size_t> importance_permutation(std::size_t rows, std::uint64_t seed,
                                                       std::size_t feature, std::size_t repeat) {
  std::vector<std::size_t> perm(rows);
  for (std::size_t i = 0; i < rows; ++i) perm[i] = i;
  Rng rng(derive_seed(derive_seed(seed, feature), repeat));
  shuffle(std::span(perm), rng);
  return perm;
}

/// importance_j = mean over repeats of base accuracy minus accuracy with
/// column j shuffled. `predict(const Matrix&) -> std::vector<int>`.
template <class Predict>
ImportanceReport permutation_importance(Predict&& predict, const Matrix& x, std::span<const int> y,
                                        std::size_t repeats, std::uint64_t seed,
                                        const std::vector<std::string>& names = {}) {
  ImportanceReport report;
  report.repeats = repeats;
  report.seed = seed;
  report.base_accuracy = accuracy_of(y, predict(x));
  Matrix shuffled = x;
  for (std::size_t j = 0; j < x.cols; ++j) {
    FeatureImportance fi;
    fi.feature = j < names.size() ? names[j] : "f" + std::to_string(j);
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto perm = importance_permutation(x.rows, seed, j, r);
      for (std::size_t i = 0; i < x.rows; ++i) shuffled(i, j) = x(perm[i], j);
      fi.repeats.push_back(report.base_accuracy - accuracy_of(y, predict(shuffled)));
    }
    for (std::size_t i = 0; i < x.rows; ++i) shuffled(i, j) = x(i, j);
    double sum = 0.0;
    for (double v : fi.repeats) sum += v;
    fi.mean = repeats ? sum / static_cast<double>(repeats) : 0.0;
    report.features.push_back(std::move(fi));
  }
  return report;
}

/// Quotes a CSV field when it contains a separator or quote.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

/// CSV "feature,mean_importance,repeat_values" with repeat values joined by ';'.
inline void write_importance_csv(std::ostream& out, const ImportanceReport& report) {
  out << "feature,mean_importance,repeat_values\n";
  for (const auto& f : report.features) {
    out << csv_field(f.feature) << ',' << detail::fmt_real(f.mean) << ',';
    for (std::size_t r = 0; r < f.repeats.size(); ++r) {
      if (r) out << ';';
      out << detail::fmt_real(f.repeats[r]);
    }
    out << '\n';
  }
}

}  // namespace iotids
