#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "multires/common.hpp"

namespace multires::ndiff {

/// Dense row-major matrix of doubles.
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Tensor2: negative shape");
  }
  Tensor2(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c)) {
      throw std::invalid_argument("Tensor2: value count does not match shape");
    }
  }

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::span<double> row(int r) { return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
  }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  Tensor2& operator+=(const Tensor2& o) {
    if (!same_shape(o)) throw std::invalid_argument("Tensor2 +=: shape mismatch");
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
  }

  std::string shape_string() const { return std::to_string(rows) + "x" + std::to_string(cols); }

  friend bool operator==(const Tensor2&, const Tensor2&) = default;
};

/// Glorot-uniform initialisation in +-sqrt(6 / (fan_in + fan_out)).
inline Tensor2 glorot_uniform(int fan_in, int fan_out, Rng& rng) {
  Tensor2 t(fan_in, fan_out);
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.data) v = (2.0 * rng.uniform() - 1.0) * a;
  return t;
}

}  // namespace multires::ndiff
