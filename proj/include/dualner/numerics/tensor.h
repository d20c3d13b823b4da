// dualner/numerics/tensor.h

// Copyright 2026  The DualNER Authors
//
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

#ifndef DUALNER_NUMERICS_TENSOR_H_
#define DUALNER_NUMERICS_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dualner/util/error.h"

namespace dualner {

/// Dense row-major tensor. Training uses BasicTensor<float>; the gradient
/// checker instantiates the same code with double.
template <typename Real>
class BasicTensor {
 public:
  using value_type = Real;

  BasicTensor() = default;
  explicit BasicTensor(std::vector<int> shape, Real fill = Real(0))
      : shape_(std::move(shape)) {
    for (int d : shape_) {
      if (d <= 0) throw ContractError("tensor dimensions must be positive");
    }
    data_.assign(Count(shape_), fill);
  }
  BasicTensor(std::vector<int> shape, std::vector<Real> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    for (int d : shape_) {
      if (d <= 0) throw ContractError("tensor dimensions must be positive");
    }
    if (Count(shape_) != data_.size())
      throw ContractError("tensor data length does not match shape");
  }

  static BasicTensor Matrix(int rows, int cols, Real fill = Real(0)) {
    return BasicTensor({rows, cols}, fill);
  }
  static BasicTensor Scalar(Real v) { return BasicTensor({1}, v); }

  const std::vector<int> &shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  /// Rows/cols view a tensor as a matrix over its last dimension.
  int cols() const { return shape_.empty() ? 0 : shape_.back(); }
  int rows() const {
    return cols() == 0 ? 0 : static_cast<int>(data_.size() / cols());
  }

  Real *data() { return data_.data(); }
  const Real *data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  std::vector<Real> &storage() { return data_; }
  const std::vector<Real> &storage() const { return data_; }

  Real &operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }
  Real &at(int r, int c) { return data_[std::size_t(r) * cols() + c]; }
  Real at(int r, int c) const { return data_[std::size_t(r) * cols() + c]; }

  std::span<Real> row(int r) {
    return {data_.data() + std::size_t(r) * cols(), std::size_t(cols())};
  }
  std::span<const Real> row(int r) const {
    return {data_.data() + std::size_t(r) * cols(), std::size_t(cols())};
  }

  void Fill(Real v) { std::fill(data_.begin(), data_.end(), v); }
  void SetZero() { Fill(Real(0)); }

  bool SameShape(const BasicTensor &o) const { return shape_ == o.shape_; }

  bool AllFinite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](Real v) { return std::isfinite(v); });
  }

  template <typename Other>
  BasicTensor<Other> Cast() const {
    std::vector<Other> out(data_.begin(), data_.end());
    return BasicTensor<Other>(shape_, std::move(out));
  }

  bool operator==(const BasicTensor &o) const = default;

  static std::size_t Count(const std::vector<int> &shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return shape.empty() ? 0 : n;
  }

 private:
  std::vector<int> shape_;
  std::vector<Real> data_;
};

using Tensor = BasicTensor<float>;

}  // namespace dualner

#endif  // DUALNER_NUMERICS_TENSOR_H_
