// src/tensor.cpp

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

#include "wsed/tensor.hpp"

#include <cmath>
#include <cstddef>

#include "wsed/errors.hpp"

namespace wsed {

namespace {

std::size_t checked_product(const std::vector<int> &shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have rank >= 1");
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 1) throw DimensionError("tensor dimension must be >= 1, got " +
                                    shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(checked_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_product(shape_) != data_.size()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::matrix(
    std::initializer_list<std::initializer_list<double>> rows) {
  int r = static_cast<int>(rows.size());
  if (r == 0) throw DimensionError("matrix literal needs at least one row");
  int c = static_cast<int>(rows.begin()->size());
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(r) * c);
  for (const auto &row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw DimensionError("matrix literal rows have unequal lengths");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vec(std::initializer_list<double> v) {
  return Tensor({static_cast<int>(v.size())}, std::vector<double>(v));
}

int Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) {
    throw ArgumentError("axis " + std::to_string(axis) +
                        " out of range for shape " + shape_str(shape_));
  }
  return shape_[axis];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string shape_str(const std::vector<int> &shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  s += "]";
  return s;
}

void check_same_shape(const Tensor &a, const Tensor &b, const char *op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void check_finite(const Tensor &t, const char *op) {
  if (!t.all_finite()) {
    throw NumericError(std::string(op) + ": non-finite value in tensor " +
                       shape_str(t.shape()));
  }
}

}  // namespace wsed
