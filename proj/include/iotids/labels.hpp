#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "iotids/error.hpp"

namespace iotids {

enum class BinaryClass { Benign = 0, Malicious = 1 };

/// Seven canonical multi-class targets plus the `Unmapped` sentinel for
/// detailed labels outside the canonical set.
enum class MultiClass {
  Benign = 0,
  CcHeartBeat,
  DDoS,
  Okiru,
  PortScan,
  Cc,
  Attack,
  Unmapped,
};

enum class Task { Binary, Multiclass };

struct ClassLabel {
  BinaryClass binary = BinaryClass::Benign;
  MultiClass multi = MultiClass::Benign;

  bool operator==(const ClassLabel&) const = default;
};

inline constexpr std::array<std::string_view, 2> kBinaryNames{"Benign", "Malicious"};
inline constexpr std::array<std::string_view, 8> kMultiNames{
    "Benign", "CcHeartBeat", "DDoS", "Okiru", "PortScan", "Cc", "Attack", "Unmapped"};

inline std::size_t class_count(Task task) { return task == Task::Binary ? 2 : 7; }

inline std::vector<std::string> class_names(Task task) {
  std::vector<std::string> out;
  if (task == Task::Binary) {
    for (auto n : kBinaryNames) out.emplace_back(n);
  } else {
    for (std::size_t i = 0; i < 7; ++i) out.emplace_back(kMultiNames[i]);
  }
  return out;
}

inline std::string_view task_name(Task task) {
  return task == Task::Binary ? "binary" : "multiclass";
}

inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "binary") return Task::Binary;
  if (s == "multiclass") return Task::Multiclass;
  return std::nullopt;
}

/// Class index of `label` for `task`, or nullopt when the row is excluded
/// from that task (sentinel multi-class labels).
inline std::optional<int> class_index(const ClassLabel& label, Task task) {
  if (task == Task::Binary) return static_cast<int>(label.binary);
  if (label.multi == MultiClass::Unmapped) return std::nullopt;
  return static_cast<int>(label.multi);
}

inline std::optional<MultiClass> parse_multi_class(std::string_view name) {
  for (std::size_t i = 0; i < kMultiNames.size(); ++i) {
    if (kMultiNames[i] == name) return static_cast<MultiClass>(i);
  }
  return std::nullopt;
}

/// Lower-cases and keeps only alphanumerics and '&', so that "C&C-HeartBeat"
/// and "c&c heartbeat" share a key.
inline std::string normalize_label_key(std::string_view raw) {
  std::string out;
  for (unsigned char ch : raw) {
    if (std::isalnum(ch) || ch == '&') out.push_back(static_cast<char>(std::tolower(ch)));
  }
  return out;
}

/// Detailed-label to canonical class table. Keys are stored normalized.
struct LabelMap {
  int version = 1;
  std::vector<std::pair<std::string, MultiClass>> entries;

  std::optional<MultiClass> find(std::string_view raw_detailed) const {
    const auto key = normalize_label_key(raw_detailed);
    for (const auto& [k, v] : entries) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  bool operator==(const LabelMap&) const = default;
};

/// Parses the versioned CSV form:
///   # label-map v<N>
///   detailed_label,class
///   <raw>,<ClassName>
inline LabelMap parse_label_map(std::istream& in) {
  LabelMap map;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# label-map v", 0) == 0) {
      map.version = std::stoi(line.substr(13));
      continue;
    }
    if (line[0] == '#') continue;
    if (!saw_header) {
      if (line != "detailed_label,class") {
        throw Error(ErrorKind::MalformedHeader, "label map header must be 'detailed_label,class'", lineno);
      }
      saw_header = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::ColumnCountMismatch, "label map row needs two columns", lineno);
    }
    const auto cls = parse_multi_class(line.substr(comma + 1));
    if (!cls) throw Error(ErrorKind::MalformedHeader, "unknown class '" + line.substr(comma + 1) + "'", lineno);
    map.entries.emplace_back(normalize_label_key(line.substr(0, comma)), *cls);
  }
  return map;
}

/// Same content as data/label_map.csv.
inline constexpr std::string_view kDefaultLabelMapCsv =
    "# label-map v1\n"
    "detailed_label,class\n"
    "C&C-HeartBeat,CcHeartBeat\n"
    "DDoS,DDoS\n"
    "Okiru,Okiru\n"
    "PartOfAHorizontalPortScan,PortScan\n"
    "PartOfHorizontalPortscan,PortScan\n"
    "C&C,Cc\n"
    "Attack,Attack\n"
    "C&C-FileDownload,Unmapped\n"
    "C&C-HeartBeat-Attack,Unmapped\n"
    "C&C-HeartBeat-FileDownload,Unmapped\n"
    "C&C-Mirai,Unmapped\n"
    "C&C-PartOfAHorizontalPortScan,Unmapped\n"
    "C&C-Torii,Unmapped\n"
    "FileDownload,Unmapped\n"
    "Okiru-Attack,Unmapped\n"
    "PartOfAHorizontalPortScan-Attack,Unmapped\n";

inline const LabelMap& default_label_map() {
  static const LabelMap map = [] {
    std::istringstream in{std::string(kDefaultLabelMapCsv)};
    return parse_label_map(in);
  }();
  return map;
}

/// Binary label from the raw label column; multi-class label from the
/// detailed-label column through `map`. Benign rows are always multi-class
/// Benign. Detailed labels missing from the table map to `Unmapped`.
inline ClassLabel canonicalize_label(std::string_view raw_label, std::string_view raw_detailed,
                                     const LabelMap& map = default_label_map()) {
  const auto bin = normalize_label_key(raw_label);
  if (bin == "benign") return {BinaryClass::Benign, MultiClass::Benign};
  if (bin != "malicious") {
    throw Error(ErrorKind::UnknownBinaryLabel, "label '" + std::string(raw_label) + "'");
  }
  const auto multi = map.find(raw_detailed);
  if (!multi || *multi == MultiClass::Benign) return {BinaryClass::Malicious, MultiClass::Unmapped};
  return {BinaryClass::Malicious, *multi};
}

}  // namespace iotids
