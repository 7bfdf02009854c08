#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "iotids/featurize.hpp"
#include "iotids/flow_data.hpp"
#include "iotids/matrix.hpp"
#include "iotids/rng.hpp"
#include "iotids/split_cv.hpp"

namespace iotids::fixtures {

struct Blobs {
  Matrix x;
  std::vector<int> y;
};

/// Class c is centered `sep` standard deviations out along axis c; the
/// remaining axes are unit noise. Rows are shuffled.
inline Blobs axis_blobs(std::size_t classes, std::size_t per_class, std::size_t dims, double sep,
                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> order(classes * per_class);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i / per_class);
  shuffle(std::span(order), rng);
  Blobs b{Matrix(order.size(), dims), order};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t d = 0; d < dims; ++d) {
      b.x(i, d) = rng.normal() + (d == static_cast<std::size_t>(order[i]) ? sep : 0.0);
    }
  }
  return b;
}

struct Partitioned {
  Matrix x_train, x_test, x_val;
  std::vector<int> y_train, y_test, y_val;
};

/// Stratified split, then min-max scaling fitted on the train rows.
inline Partitioned split_and_scale(const Blobs& b, std::size_t classes, Fractions fr, std::uint64_t seed) {
  const auto s = stratified_split(b.y, classes, fr, seed);
  Partitioned p;
  const auto params = fit_min_max(take_rows(b.x, s.train));
  p.x_train = transform_min_max(params, take_rows(b.x, s.train));
  p.x_test = transform_min_max(params, take_rows(b.x, s.test));
  p.x_val = transform_min_max(params, take_rows(b.x, s.val));
  p.y_train = take<int>(b.y, s.train);
  p.y_test = take<int>(b.y, s.test);
  p.y_val = take<int>(b.y, s.val);
  return p;
}

/// Small noisy training set: column 0 carries a weak class signal, the other
/// columns are uniform noise and 20% of labels are flipped. Validation rows
/// come from the same distribution, so validation loss falls while the model
/// learns the signal and rises once it fits the noise.
inline Partitioned planted_minimum(std::uint64_t seed, std::size_t n_train = 120, std::size_t n_val = 400,
                                   std::size_t dims = 8) {
  Rng rng(seed);
  Partitioned p;
  const auto fill = [&](Matrix& x, std::vector<int>& y, std::size_t n) {
    x = Matrix(n, dims);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(i % 2);
      x(i, 0) = 0.5 + (c ? 0.1 : -0.1) + 0.15 * rng.normal();
      for (std::size_t d = 1; d < dims; ++d) x(i, d) = rng.uniform_open();
      y[i] = rng.bernoulli(0.2) ? 1 - c : c;
    }
  };
  fill(p.x_train, p.y_train, n_train);
  fill(p.x_val, p.y_val, n_val);
  return p;
}

/// Ensemble member whose vote for row i is the value in column `col`.
struct ColumnVoter {
  std::size_t col = 0;
  std::size_t n_cols = 1;
  std::size_t n_classes = 2;

  std::size_t width() const { return n_cols; }
  std::size_t classes() const { return n_classes; }
  std::vector<int> predict_labels(const Matrix& x) const {
    std::vector<int> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = static_cast<int>(x(i, col));
    return out;
  }
};

inline double accuracy(std::span<const int> truth, std::span<const int> pred) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == pred[i];
  return truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// Fully populated record with the given addresses and label.
inline RawFlowRecord flow(std::string orig_h = "192.168.1.5", std::string resp_h = "8.8.8.8",
                          std::string label = "Benign", std::string detailed = "-") {
  RawFlowRecord r;
  r.ts = 1545000000.5;
  r.uid = "CAbc123";
  r.orig_h = std::move(orig_h);
  r.orig_p = 40000;
  r.resp_h = std::move(resp_h);
  r.resp_p = 53;
  r.proto = Proto::Udp;
  r.service = "dns";
  r.duration = 0.5;
  r.orig_bytes = 10;
  r.resp_bytes = 20;
  r.conn_state = "SF";
  r.local_orig = false;
  r.local_resp = false;
  r.missed_bytes = 0;
  r.history = "Dd";
  r.orig_pkts = 1;
  r.orig_ip_bytes = 38;
  r.resp_pkts = 1;
  r.resp_ip_bytes = 48;
  r.raw_label = std::move(label);
  r.raw_detailed_label = std::move(detailed);
  return r;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("iotids_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace iotids::fixtures
