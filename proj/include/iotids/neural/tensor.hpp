#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "iotids/error.hpp"
#include "iotids/matrix.hpp"

namespace iotids::nn {

/// Row-major tensor of rank <= 3; dimension 0 is the batch.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, double fill = 0.0)
      : shape(std::move(s)), data(count(shape), fill) {}

  static std::size_t count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t batch() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t per_row() const { return batch() ? data.size() / batch() : 0; }

  static Tensor from_matrix(const Matrix& m) {
    Tensor t({m.rows, m.cols});
    t.data = m.data;
    return t;
  }

  Matrix to_matrix() const {
    Matrix m(batch(), per_row());
    m.data = data;
    return m;
  }
};

}  // namespace iotids::nn
