#pragma once

// Labeled Zeek connection logs: parsing, missing-value imputation, label
// canonicalization and per-class sampling.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "iotids/error.hpp"
#include "iotids/labels.hpp"
#include "iotids/rng.hpp"

namespace iotids {

enum class Proto { Tcp, Udp, Icmp, Other };

inline std::string_view proto_name(Proto p) {
  switch (p) {
    case Proto::Tcp: return "tcp";
    case Proto::Udp: return "udp";
    case Proto::Icmp: return "icmp";
    case Proto::Other: return "other";
  }
  return "other";
}

inline Proto parse_proto(std::string_view s) {
  if (s == "tcp") return Proto::Tcp;
  if (s == "udp") return Proto::Udp;
  if (s == "icmp") return Proto::Icmp;
  return Proto::Other;
}

/// One connection-log row. `std::nullopt` marks an unset ("-") value.
struct RawFlowRecord {
  double ts = 0.0;
  std::string uid;
  std::string orig_h;
  std::optional<int> orig_p;
  std::string resp_h;
  std::optional<int> resp_p;
  Proto proto = Proto::Other;
  std::optional<std::string> service;
  std::optional<double> duration;
  std::optional<std::uint64_t> orig_bytes;
  std::optional<std::uint64_t> resp_bytes;
  std::string conn_state;
  std::optional<bool> local_orig;
  std::optional<bool> local_resp;
  std::optional<std::uint64_t> missed_bytes;
  std::optional<std::string> history;
  std::optional<std::uint64_t> orig_pkts;
  std::optional<std::uint64_t> orig_ip_bytes;
  std::optional<std::uint64_t> resp_pkts;
  std::optional<std::uint64_t> resp_ip_bytes;
  std::optional<std::string> tunnel_parents;
  std::string raw_label;
  std::string raw_detailed_label;

  bool operator==(const RawFlowRecord&) const = default;
};

struct LabeledFlow {
  RawFlowRecord record;
  ClassLabel label;
};

struct Provenance {
  std::vector<std::string> sources;
  std::optional<std::uint64_t> sample_seed;
};

struct Dataset {
  std::vector<LabeledFlow> rows;
  Provenance provenance;

  std::size_t size() const { return rows.size(); }
};

/// Canonical column names in IoT23 order.
inline constexpr std::array<std::string_view, 23> kConnFields{
    "ts",         "uid",          "id.orig_h",     "id.orig_p",      "id.resp_h",
    "id.resp_p",  "proto",        "service",       "duration",       "orig_bytes",
    "resp_bytes", "conn_state",   "local_orig",    "local_resp",     "missed_bytes",
    "history",    "orig_pkts",    "orig_ip_bytes", "resp_pkts",      "resp_ip_bytes",
    "tunnel_parents", "label",    "detailed-label"};

namespace detail {

inline std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Splits on runs of spaces, dropping empty pieces.
inline std::vector<std::string> split_spaces(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const auto start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

inline bool is_unset(std::string_view tok) { return tok == "-" || tok == "(empty)"; }

inline std::optional<std::string> opt_string(std::string_view tok) {
  if (tok == "-") return std::nullopt;
  if (tok == "(empty)") return std::string{};
  return std::string(tok);
}

inline std::string_view canonical_field_name(std::string_view name) {
  if (name == "orig_h") return "id.orig_h";
  if (name == "orig_p") return "id.orig_p";
  if (name == "resp_h") return "id.resp_h";
  if (name == "resp_p") return "id.resp_p";
  if (name == "detailed_label") return "detailed-label";
  return name;
}

struct FieldParser {
  std::size_t line;
  std::string_view column;

  [[noreturn]] void fail(std::string_view tok) const {
    throw Error(ErrorKind::BadNumeric,
                "column '" + std::string(column) + "' has non-numeric token '" + std::string(tok) + "'",
                line);
  }

  double real(std::string_view tok) const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size()) fail(tok);
    return v;
  }

  std::optional<double> opt_real(std::string_view tok) const {
    if (is_unset(tok)) return std::nullopt;
    const double v = real(tok);
    if (v < 0.0) fail(tok);
    return v;
  }

  std::optional<std::uint64_t> count(std::string_view tok) const {
    if (is_unset(tok)) return std::nullopt;
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size()) fail(tok);
    return v;
  }

  std::optional<int> port(std::string_view tok) const {
    const auto v = count(tok);
    if (!v) return std::nullopt;
    if (*v > 65535) fail(tok);
    return static_cast<int>(*v);
  }

  std::optional<bool> tri(std::string_view tok) const {
    if (is_unset(tok)) return std::nullopt;
    if (tok == "T") return true;
    if (tok == "F") return false;
    fail(tok);
  }
};

inline void assign_field(RawFlowRecord& r, std::string_view name, std::string_view tok,
                         std::size_t line) {
  const FieldParser p{line, name};
  if (name == "ts") {
    r.ts = is_unset(tok) ? 0.0 : p.real(tok);
  } else if (name == "uid") {
    r.uid = tok;
  } else if (name == "id.orig_h") {
    r.orig_h = tok;
  } else if (name == "id.orig_p") {
    r.orig_p = p.port(tok);
  } else if (name == "id.resp_h") {
    r.resp_h = tok;
  } else if (name == "id.resp_p") {
    r.resp_p = p.port(tok);
  } else if (name == "proto") {
    r.proto = parse_proto(tok);
  } else if (name == "service") {
    r.service = opt_string(tok);
  } else if (name == "duration") {
    r.duration = p.opt_real(tok);
  } else if (name == "orig_bytes") {
    r.orig_bytes = p.count(tok);
  } else if (name == "resp_bytes") {
    r.resp_bytes = p.count(tok);
  } else if (name == "conn_state") {
    r.conn_state = is_unset(tok) ? std::string{} : std::string(tok);
  } else if (name == "local_orig") {
    r.local_orig = p.tri(tok);
  } else if (name == "local_resp") {
    r.local_resp = p.tri(tok);
  } else if (name == "missed_bytes") {
    r.missed_bytes = p.count(tok);
  } else if (name == "history") {
    r.history = opt_string(tok);
  } else if (name == "orig_pkts") {
    r.orig_pkts = p.count(tok);
  } else if (name == "orig_ip_bytes") {
    r.orig_ip_bytes = p.count(tok);
  } else if (name == "resp_pkts") {
    r.resp_pkts = p.count(tok);
  } else if (name == "resp_ip_bytes") {
    r.resp_ip_bytes = p.count(tok);
  } else if (name == "tunnel_parents") {
    r.tunnel_parents = opt_string(tok);
  } else if (name == "label") {
    r.raw_label = tok;
  } else if (name == "detailed-label") {
    r.raw_detailed_label = tok;
  }
}

}  // namespace detail

struct ParseResult {
  std::vector<RawFlowRecord> records;
  bool labeled = false;  // header carried a "label" column
};

/// Parses a Zeek TSV connection log. Column order comes from the "#fields"
/// directive; other '#' lines are ignored. When a row has fewer tab-separated
/// fields than the header, its last field is re-split on runs of spaces
/// (IoT23 writes "tunnel_parents label detailed-label" that way).
inline ParseResult parse_conn_log(std::istream& in) {
  ParseResult result;
  std::vector<std::string> header;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("#fields", 0) == 0) {
        header.clear();
        const auto parts = detail::split_on(std::string_view(line).substr(7), '\t');
        for (const auto& part : parts) {
          for (auto& name : detail::split_spaces(part)) {
            header.emplace_back(detail::canonical_field_name(name));
          }
        }
        if (header.empty()) throw Error(ErrorKind::MalformedHeader, "empty #fields directive", lineno);
        result.labeled = std::find(header.begin(), header.end(), "label") != header.end();
      }
      continue;
    }
    if (header.empty()) {
      throw Error(ErrorKind::MalformedHeader, "data row before #fields directive", lineno);
    }
    auto fields = detail::split_on(line, '\t');
    if (fields.size() < header.size()) {
      auto tail = detail::split_spaces(fields.back());
      fields.pop_back();
      fields.insert(fields.end(), tail.begin(), tail.end());
    }
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::ColumnCountMismatch,
                  "expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()),
                  lineno);
    }
    RawFlowRecord rec;
    for (std::size_t i = 0; i < header.size(); ++i) {
      detail::assign_field(rec, header[i], fields[i], lineno);
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

inline ParseResult parse_conn_log(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_conn_log(in);
}

namespace detail {

inline std::string fmt_real(double v) {
  std::array<char, 64> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

inline std::string fmt_fixed6(double v) {
  std::array<char, 64> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 6);
  return std::string(buf.data(), p);
}

template <class T>
std::string fmt_opt(const std::optional<T>& v) {
  if (!v) return "-";
  if constexpr (std::is_same_v<T, std::string>) {
    return v->empty() ? "(empty)" : *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    return *v ? "T" : "F";
  } else if constexpr (std::is_same_v<T, double>) {
    return fmt_real(*v);
  } else {
    return std::to_string(*v);
  }
}

}  // namespace detail

/// Writes records as a labeled Zeek log. With `iot23_quirk` the trailing
/// three columns are separated by three spaces, as in the IoT23 files.
inline void write_conn_log(std::ostream& out, const std::vector<RawFlowRecord>& records,
                           bool iot23_quirk = true) {
  out << "#separator \\x09\n#set_separator\t,\n#empty_field\t(empty)\n#unset_field\t-\n#path\tconn\n";
  out << "#fields";
  for (std::size_t i = 0; i < kConnFields.size(); ++i) {
    const bool spaced = iot23_quirk && i >= kConnFields.size() - 2;
    out << (spaced ? "   " : "\t") << kConnFields[i];
  }
  out << '\n';
  for (const auto& r : records) {
    const std::string str_or_empty = r.conn_state.empty() ? "-" : r.conn_state;
    out << detail::fmt_fixed6(r.ts) << '\t' << r.uid << '\t' << r.orig_h << '\t'
        << detail::fmt_opt(r.orig_p) << '\t' << r.resp_h << '\t' << detail::fmt_opt(r.resp_p)
        << '\t' << proto_name(r.proto) << '\t' << detail::fmt_opt(r.service) << '\t'
        << detail::fmt_opt(r.duration) << '\t' << detail::fmt_opt(r.orig_bytes) << '\t'
        << detail::fmt_opt(r.resp_bytes) << '\t' << str_or_empty << '\t'
        << detail::fmt_opt(r.local_orig) << '\t' << detail::fmt_opt(r.local_resp) << '\t'
        << detail::fmt_opt(r.missed_bytes) << '\t' << detail::fmt_opt(r.history) << '\t'
        << detail::fmt_opt(r.orig_pkts) << '\t' << detail::fmt_opt(r.orig_ip_bytes) << '\t'
        << detail::fmt_opt(r.resp_pkts) << '\t' << detail::fmt_opt(r.resp_ip_bytes);
    const char* sep = iot23_quirk ? "   " : "\t";
    out << '\t' << detail::fmt_opt(r.tunnel_parents) << sep << r.raw_label << sep
        << r.raw_detailed_label << '\n';
  }
}

/// Missing numerics (and tri-state booleans) become 0; missing service
/// becomes "unknown".
inline RawFlowRecord impute_missing(RawFlowRecord r) {
  if (!r.orig_p) r.orig_p = 0;
  if (!r.resp_p) r.resp_p = 0;
  if (!r.service) r.service = "unknown";
  if (!r.duration) r.duration = 0.0;
  if (!r.orig_bytes) r.orig_bytes = 0;
  if (!r.resp_bytes) r.resp_bytes = 0;
  if (!r.local_orig) r.local_orig = false;
  if (!r.local_resp) r.local_resp = false;
  if (!r.missed_bytes) r.missed_bytes = 0;
  if (!r.orig_pkts) r.orig_pkts = 0;
  if (!r.orig_ip_bytes) r.orig_ip_bytes = 0;
  if (!r.resp_pkts) r.resp_pkts = 0;
  if (!r.resp_ip_bytes) r.resp_ip_bytes = 0;
  return r;
}

inline bool has_missing_numeric(const RawFlowRecord& r) {
  return !r.orig_p || !r.resp_p || !r.duration || !r.orig_bytes || !r.resp_bytes ||
         !r.local_orig || !r.local_resp || !r.missed_bytes || !r.orig_pkts ||
         !r.orig_ip_bytes || !r.resp_pkts || !r.resp_ip_bytes;
}

/// Imputes and labels every record.
inline Dataset make_dataset(const std::vector<RawFlowRecord>& records,
                            std::vector<std::string> sources = {},
                            const LabelMap& map = default_label_map()) {
  Dataset ds;
  ds.rows.reserve(records.size());
  for (const auto& r : records) {
    auto label = canonicalize_label(r.raw_label, r.raw_detailed_label, map);
    ds.rows.push_back({impute_missing(r), label});
  }
  ds.provenance.sources = std::move(sources);
  return ds;
}

/// Per-class labels for `task`; -1 for rows excluded from the task.
inline std::vector<int> task_labels(const Dataset& ds, Task task) {
  std::vector<int> out;
  out.reserve(ds.size());
  for (const auto& row : ds.rows) out.push_back(class_index(row.label, task).value_or(-1));
  return out;
}

/// Uniform sample without replacement of min(per_class, available) rows for
/// each class of `task`, drawn by a partial Fisher-Yates shuffle seeded with
/// derive_seed(seed, class). Output is grouped by class, in sampled order.
/// Throws EmptyClass when a class has no rows at all.
inline Dataset balance_sample(const Dataset& ds, Task task, std::size_t per_class,
                              std::uint64_t seed) {
  if (per_class < 1) throw Error(ErrorKind::EmptyClass, "per_class must be >= 1");
  const auto labels = task_labels(ds, task);
  const auto classes = class_count(task);
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Dataset out;
  out.provenance = ds.provenance;
  out.provenance.sample_seed = seed;
  for (std::size_t c = 0; c < classes; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) {
      const auto names = class_names(task);
      throw Error(ErrorKind::EmptyClass, "class '" + names[c] + "' has no rows");
    }
    Rng rng(derive_seed(seed, c));
    const std::size_t take = std::min(per_class, idx.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
      out.rows.push_back(ds.rows[idx[i]]);
    }
  }
  return out;
}

}  // namespace iotids
