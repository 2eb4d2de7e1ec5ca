// wsed/tensor.hpp

// Copyright 2026  The wsed authors

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

#ifndef WSED_TENSOR_HPP_
#define WSED_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace wsed {

// Dense row-major tensor of doubles.  Rank is the length of the shape
// vector; a rank-0 tensor is not supported, scalars are shape {1}.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor of the given shape.  Every dimension must be >= 1.
  explicit Tensor(std::vector<int> shape);

  // Tensor with explicit contents; data.size() must equal the shape product.
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  // Row-major matrix literal, mainly for tests:
  //   Tensor::matrix({{1, 2}, {3, 4}})
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> r);

  static Tensor vec(std::initializer_list<double> v);

  const std::vector<int> &shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const;
  std::size_t size() const { return data_.size(); }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::vector<double> &vals() { return data_; }
  const std::vector<double> &vals() const { return data_; }

  double &operator()(int i) { return data_[static_cast<std::size_t>(i)]; }
  double operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }
  double &operator()(int i, int j) {
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
  }
  double &operator()(int i, int j, int k) {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  double operator()(int i, int j, int k) const {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  double &operator()(int i, int j, int k, int l) {
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] +
                  k) * shape_[3] + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] +
                  k) * shape_[3] + l];
  }

  bool same_shape(const Tensor &other) const { return shape_ == other.shape_; }
  bool all_finite() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// "[2x3x4]" rendering used by error messages.
std::string shape_str(const std::vector<int> &shape);

// Throws DimensionError naming both shapes when they differ.
void check_same_shape(const Tensor &a, const Tensor &b, const char *op);

// Throws NumericError when the tensor holds a NaN or infinity.
void check_finite(const Tensor &t, const char *op);

}  // namespace wsed

#endif  // WSED_TENSOR_HPP_
