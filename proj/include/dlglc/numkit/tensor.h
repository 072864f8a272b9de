// include/dlglc/numkit/tensor.h

// Copyright 2026  dlglc authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef DLGLC_NUMKIT_TENSOR_H_
#define DLGLC_NUMKIT_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dlglc {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Dense row-major array of doubles. A rank-1 tensor is a plain vector; a
// rank-2 tensor is a matrix whose rows are contiguous.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor Vector(std::vector<double> values);
  static Tensor Vector(std::initializer_list<double> values) {
    return Vector(std::vector<double>(values));
  }
  static Tensor FromMatrix(const Matrix &m);
  static Tensor FromRow(const RowVector &v);

  const std::vector<std::size_t> &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  // Rows/cols when viewed as a matrix; a rank-1 tensor is a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  double &operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double &at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double> &data() const { return values_; }

  Eigen::Map<Matrix> AsMatrix();
  Eigen::Map<const Matrix> AsMatrix() const;
  Eigen::Map<const RowVector> AsRow() const;

  void SetZero();
  bool AllFinite() const;
  bool SameShape(const Tensor &other) const { return shape_ == other.shape_; }

  friend bool operator==(const Tensor &a, const Tensor &b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// A trainable parameter: value plus accumulated gradient of the same shape.
struct Param {
  Param() = default;
  explicit Param(Tensor v) : value(std::move(v)), grad(value.shape()) {}

  Tensor value;
  Tensor grad;

  void ZeroGrad() { grad.SetZero(); }
};

}  // namespace dlglc

#endif  // DLGLC_NUMKIT_TENSOR_H_
