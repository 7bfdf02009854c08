#pragma once

// Synthetic labeled Zeek logs with class-dependent flow statistics.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iotids/flow_data.hpp"
#include "iotids/rng.hpp"

namespace iotids {

/// Numeric fields that can carry class signal, in the order they are used.
inline const std::vector<std::string>& synth_informative_fields() {
  static const std::vector<std::string> f{"duration",      "orig_bytes",    "resp_bytes",   "orig_pkts",
                                          "resp_pkts",     "orig_ip_bytes", "resp_ip_bytes", "missed_bytes",
                                          "orig_p",        "resp_p"};
  return f;
}

struct SynthSpec {
  std::size_t classes = 2;
  std::size_t rows_per_class = 100;
  std::size_t feature_width = 4;  // informative numeric fields
  double separation = 8.0;        // distance between neighbouring class centers, in spreads
  double spread = 1.0;
  double noise = 0.0;  // label flip rate
  std::uint64_t seed = 0;
  /// Optional explicit centers[class][field] and spreads[class] in spread units.
  std::vector<std::vector<double>> centers;
  std::vector<double> spreads;
};

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{"classes", "rows_per_class", "feature_width", "separation",
                                              "spread",  "noise",          "seed",          "centers",
                                              "spreads"};
  if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "synth spec must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw Error(ErrorKind::ConfigInvalid, "unknown synth spec key '" + k + "'");
    }
  }
  SynthSpec s;
  try {
    s.classes = j.at("classes").get<std::size_t>();
    s.rows_per_class = j.at("rows_per_class").get<std::size_t>();
    s.feature_width = j.value("feature_width", s.feature_width);
    s.separation = j.value("separation", s.separation);
    s.spread = j.value("spread", s.spread);
    s.noise = j.value("noise", s.noise);
    s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("centers")) s.centers = j.at("centers").get<std::vector<std::vector<double>>>();
    if (j.contains("spreads")) s.spreads = j.at("spreads").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("synth spec: ") + e.what());
  }
  if (s.classes != 2 && s.classes != 7) throw Error(ErrorKind::ConfigInvalid, "classes must be 2 or 7");
  if (s.noise < 0.0 || s.noise >= 0.5) throw Error(ErrorKind::ConfigInvalid, "noise must be in [0, 0.5)");
  if (s.feature_width < 1 || s.feature_width > synth_informative_fields().size()) {
    throw Error(ErrorKind::ConfigInvalid, "feature_width must be in [1, " +
                                              std::to_string(synth_informative_fields().size()) + "]");
  }
  if (s.rows_per_class < 1) throw Error(ErrorKind::ConfigInvalid, "rows_per_class must be >= 1");
  if (!(s.spread > 0.0)) throw Error(ErrorKind::ConfigInvalid, "spread must be > 0");
  if (!s.centers.empty()) {
    if (s.centers.size() != s.classes) throw Error(ErrorKind::ConfigInvalid, "centers needs one row per class");
    for (const auto& c : s.centers) {
      if (c.size() != s.feature_width) throw Error(ErrorKind::ConfigInvalid, "centers rows need feature_width");
    }
  }
  if (!s.spreads.empty() && s.spreads.size() != s.classes) {
    throw Error(ErrorKind::ConfigInvalid, "spreads needs one entry per class");
  }
  return s;
}

/// (label, detailed-label) as spelled in the IoT23 logs.
inline std::pair<std::string, std::string> synth_label(std::size_t cls, std::size_t classes) {
  if (cls == 0) return {"benign", "-"};
  if (classes == 2) return {"Malicious", "PartOfAHorizontalPortScan"};
  static const std::vector<std::string> detail{"C&C-HeartBeat", "DDoS", "Okiru", "PartOfAHorizontalPortScan",
                                               "C&C", "Attack"};
  return {"Malicious", detail.at(cls - 1)};
}

namespace detail {

struct SynthField {
  double scale;
  bool integral;
  double cap;
};

inline SynthField synth_field(const std::string& name) {
  if (name == "duration") return {0.25, false, 1e9};
  if (name == "orig_p" || name == "resp_p") return {10.0, true, 65535.0};
  if (name.find("pkts") != std::string::npos) return {2.0, true, 1e12};
  return {50.0, true, 1e12};
}

inline void set_numeric(RawFlowRecord& r, const std::string& name, double v) {
  const auto u = [&] { return static_cast<std::uint64_t>(std::llround(std::max(0.0, v))); };
  if (name == "duration") r.duration = std::max(0.0, v);
  else if (name == "orig_bytes") r.orig_bytes = u();
  else if (name == "resp_bytes") r.resp_bytes = u();
  else if (name == "orig_pkts") r.orig_pkts = u();
  else if (name == "resp_pkts") r.resp_pkts = u();
  else if (name == "orig_ip_bytes") r.orig_ip_bytes = u();
  else if (name == "resp_ip_bytes") r.resp_ip_bytes = u();
  else if (name == "missed_bytes") r.missed_bytes = u();
  else if (name == "orig_p") r.orig_p = static_cast<int>(std::min<std::uint64_t>(u(), 65535));
  else if (name == "resp_p") r.resp_p = static_cast<int>(std::min<std::uint64_t>(u(), 65535));
}

}  // namespace detail

/// Rows are shuffled across classes. Informative field f places class c at
/// scale_f * spread * (4 + separation * rank_f(c)) where rank_0 is the
/// identity and later fields use seeded permutations; the remaining fields and
/// all categorical fields share one distribution across classes.
inline std::vector<RawFlowRecord> generate_synthetic(const SynthSpec& spec) {
  const auto& fields = synth_informative_fields();
  Rng layout(derive_seed(spec.seed, 0));
  std::vector<std::vector<std::size_t>> rank(spec.feature_width, std::vector<std::size_t>(spec.classes));
  for (std::size_t f = 0; f < spec.feature_width; ++f) {
    for (std::size_t c = 0; c < spec.classes; ++c) rank[f][c] = c;
    if (f > 0) shuffle(std::span(rank[f]), layout);
  }

  std::vector<std::size_t> order(spec.classes * spec.rows_per_class);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i / spec.rows_per_class;
  shuffle(std::span(order), layout);

  static const std::vector<std::string> protos{"tcp", "tcp", "udp", "icmp"};
  static const std::vector<std::string> services{"-", "dns", "http", "ssl"};
  static const std::vector<std::string> states{"S0", "SF", "REJ", "OTH", "RSTO"};
  static const std::vector<int> resp_hosts{8, 23, 45, 61, 77, 91, 104, 151, 185, 203};

  Rng rng(derive_seed(spec.seed, 1));
  std::vector<RawFlowRecord> out;
  out.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t cls = order[i];
    RawFlowRecord r;
    r.ts = 1545000000.0 + static_cast<double>(i) * 0.25;
    r.uid = "C" + std::to_string(rng.next() % 100000000000ULL);
    r.orig_h = "192.168.1." + std::to_string(1 + rng.below(254));
    r.resp_h = std::to_string(resp_hosts[rng.below(resp_hosts.size())]) + "." + std::to_string(rng.below(256)) +
               "." + std::to_string(rng.below(256)) + "." + std::to_string(1 + rng.below(254));
    r.proto = parse_proto(protos[rng.below(protos.size())]);
    const auto& svc = services[rng.below(services.size())];
    if (svc != "-") r.service = svc;
    r.conn_state = states[rng.below(states.size())];
    r.local_orig = false;
    r.local_resp = false;
    r.history = "S";
    // Class-independent baseline for every numeric field.
    for (const auto& name : fields) {
      const auto fd = detail::synth_field(name);
      detail::set_numeric(r, name, fd.scale * (2.0 + 30.0 * rng.uniform_open()));
    }
    const double sd = spec.spread * (spec.spreads.empty() ? 1.0 : spec.spreads[cls]);
    for (std::size_t f = 0; f < spec.feature_width; ++f) {
      const auto fd = detail::synth_field(fields[f]);
      const double center = spec.centers.empty()
                                ? 4.0 + spec.separation * static_cast<double>(rank[f][cls])
                                : spec.centers[cls][f];
      const double v = fd.scale * spec.spread * center + fd.scale * sd * rng.normal();
      detail::set_numeric(r, fields[f], std::min(v, fd.cap));
    }
    std::size_t written = cls;
    if (spec.noise > 0.0 && rng.bernoulli(spec.noise)) {
      written = (cls + 1 + rng.below(spec.classes - 1)) % spec.classes;
    }
    std::tie(r.raw_label, r.raw_detailed_label) = synth_label(written, spec.classes);
    out.push_back(std::move(r));
  }
  return out;
}

/// Writes DIR/conn.log.labeled and returns its path.
inline std::filesystem::path write_synthetic(const SynthSpec& spec, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + dir.string());
  const auto path = dir / "conn.log.labeled";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  write_conn_log(out, generate_synthetic(spec));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
  return path;
}

}  // namespace iotids
