#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tncap/error.hpp"

namespace tncap {

using Shape = std::vector<std::size_t>;
using MultiIndex = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + ")";
}

/// Row-major strides.
inline std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t k = shape.size(); k-- > 1;) strides[k - 1] = strides[k] * shape[k];
  return strides;
}

/// Dense real tensor in row-major order. An order-0 tensor holds one scalar.
class DenseTensor {
 public:
  DenseTensor() : data_(1, 0.0) {}
  explicit DenseTensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
    check_dims();
  }
  DenseTensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_dims();
    if (data_.size() != shape_size(shape_))
      throw Error(ErrorKind::shape_mismatch, shape_string(shape_),
                  "data length " + std::to_string(data_.size()) + " does not match shape");
    for (std::size_t i = 0; i < data_.size(); ++i)
      if (!std::isfinite(data_[i])) throw Error(ErrorKind::out_of_range, "data[" + std::to_string(i) + "]", "non-finite entry");
  }

  static DenseTensor vector(std::vector<double> values) {
    Shape shape{values.size()};
    return DenseTensor(std::move(shape), std::move(values));
  }

  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  std::size_t offset(const MultiIndex& index) const {
    if (index.size() != shape_.size())
      throw Error(ErrorKind::shape_mismatch, shape_string(shape_), "index of order " + std::to_string(index.size()));
    std::size_t off = 0;
    for (std::size_t k = 0; k < index.size(); ++k) {
      if (index[k] >= shape_[k])
        throw Error(ErrorKind::out_of_range, "mode " + std::to_string(k),
                    "index " + std::to_string(index[k]) + " >= " + std::to_string(shape_[k]));
      off = off * shape_[k] + index[k];
    }
    return off;
  }

  double& operator()(const MultiIndex& index) { return data_[offset(index)]; }
  double operator()(const MultiIndex& index) const { return data_[offset(index)]; }
  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  bool operator==(const DenseTensor&) const = default;

 private:
  void check_dims() const {
    for (std::size_t k = 0; k < shape_.size(); ++k)
      if (shape_[k] == 0) throw Error(ErrorKind::non_positive_dim, "mode " + std::to_string(k), "zero-length mode");
  }

  Shape shape_;
  std::vector<double> data_;
};

/// Advances a row-major multi-index; returns false after the last one.
inline bool next_index(MultiIndex& index, const Shape& shape) {
  for (std::size_t k = index.size(); k-- > 0;) {
    if (++index[k] < shape[k]) return true;
    index[k] = 0;
  }
  return false;
}

inline double inner_product(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape())
    throw Error(ErrorKind::shape_mismatch, shape_string(a.shape()) + " vs " + shape_string(b.shape()),
                "inner product needs equal shapes");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline DenseTensor outer_product(const std::vector<DenseTensor>& vectors) {
  Shape shape;
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].order() != 1)
      throw Error(ErrorKind::shape_mismatch, "argument " + std::to_string(k), "outer product takes order-1 tensors");
    shape.push_back(vectors[k].shape()[0]);
  }
  DenseTensor out(shape, 1.0);
  MultiIndex idx(shape.size(), 0);
  std::size_t flat = 0;
  do {
    double v = 1.0;
    for (std::size_t k = 0; k < idx.size(); ++k) v *= vectors[k][idx[k]];
    out[flat++] = v;
  } while (next_index(idx, shape));
  return out;
}

/// Reorders modes: result mode j is input mode axes[j].
inline DenseTensor permute(const DenseTensor& t, const std::vector<std::size_t>& axes) {
  if (axes.size() != t.order())
    throw Error(ErrorKind::shape_mismatch, shape_string(t.shape()), "permutation of wrong length");
  Shape shape(axes.size());
  auto in_strides = strides_of(t.shape());
  std::vector<std::size_t> strides(axes.size());
  for (std::size_t j = 0; j < axes.size(); ++j) {
    shape[j] = t.shape().at(axes[j]);
    strides[j] = in_strides[axes[j]];
  }
  DenseTensor out(shape);
  MultiIndex idx(shape.size(), 0);
  std::size_t flat = 0;
  do {
    std::size_t off = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) off += idx[j] * strides[j];
    out[flat++] = t[off];
  } while (next_index(idx, shape));
  return out;
}

/// Mode-k product (0-based k): contracts the columns of `matrix` against mode k.
inline DenseTensor mode_k_product(const DenseTensor& t, const DenseTensor& matrix, std::size_t k) {
  if (matrix.order() != 2) throw Error(ErrorKind::shape_mismatch, "matrix", "mode-k product takes a matrix");
  if (k >= t.order()) throw Error(ErrorKind::shape_mismatch, "mode " + std::to_string(k), "mode out of range");
  const std::size_t rows = matrix.shape()[0], cols = matrix.shape()[1];
  if (cols != t.shape()[k])
    throw Error(ErrorKind::shape_mismatch, "mode " + std::to_string(k),
                "matrix has " + std::to_string(cols) + " columns, tensor mode has " + std::to_string(t.shape()[k]));
  std::size_t outer = 1, inner = 1;
  for (std::size_t j = 0; j < k; ++j) outer *= t.shape()[j];
  for (std::size_t j = k + 1; j < t.order(); ++j) inner *= t.shape()[j];
  Shape shape = t.shape();
  shape[k] = rows;
  DenseTensor out(shape);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t a = 0; a < rows; ++a)
      for (std::size_t b = 0; b < cols; ++b) {
        const double m = matrix[a * cols + b];
        if (m == 0.0) continue;
        const double* src = &t.data()[(o * cols + b) * inner];
        double* dst = &out.data()[(o * rows + a) * inner];
        for (std::size_t i = 0; i < inner; ++i) dst[i] += m * src[i];
      }
  return out;
}

using LocalMap = std::function<std::vector<double>(double)>;

/// phi(t) = (cos(pi t / 2), sin(pi t / 2)).
inline std::vector<double> trigonometric_local_map(double t) {
  return {std::cos(std::numbers::pi * t / 2.0), std::sin(std::numbers::pi * t / 2.0)};
}

/// Phi(x) = phi(x_1) (x) ... (x) phi(x_p) for a caller-supplied local map of
/// output size `local_dim`.
inline DenseTensor feature_map(const DenseTensor& x, std::size_t local_dim, const LocalMap& phi) {
  if (x.order() != 1) throw Error(ErrorKind::shape_mismatch, shape_string(x.shape()), "feature map input must be a vector");
  std::vector<DenseTensor> locals;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto v = phi(x[i]);
    if (v.size() != local_dim)
      throw Error(ErrorKind::unsupported_local_dim, std::to_string(local_dim),
                  "local map returned " + std::to_string(v.size()) + " values");
    locals.push_back(DenseTensor::vector(std::move(v)));
  }
  return outer_product(locals);
}

inline DenseTensor feature_map(const DenseTensor& x, std::size_t local_dim = 2) {
  if (local_dim != 2)
    throw Error(ErrorKind::unsupported_local_dim, std::to_string(local_dim),
                "the default trigonometric map has local dimension 2");
  return feature_map(x, 2, trigonometric_local_map);
}

}  // namespace tncap
