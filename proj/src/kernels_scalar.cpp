// src/kernels_scalar.cpp

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

#include "wsed/kernels.hpp"

namespace wsed {
namespace kern {
namespace scalar {

// Reference implementations.  Plain loops, one accumulator, no reordering:
// these define the semantics the SIMD variants are tested against.

void axpy(std::size_t n, double a, const double *x, double *y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(std::size_t n, double a, double *x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void vadd(std::size_t n, const double *a, const double *b, double *out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void vsub(std::size_t n, const double *a, const double *b, double *out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void vmul(std::size_t n, const double *a, const double *b, double *out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void vmax(std::size_t n, const double *a, const double *b, double *out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

double dot(std::size_t n, const double *a, const double *b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double vsum(std::size_t n, const double *x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace scalar
}  // namespace kern
}  // namespace wsed
