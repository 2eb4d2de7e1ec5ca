// src/kernels_neon.cpp

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

#if defined(__aarch64__)

#include <arm_neon.h>

// vfmaq is avoided on purpose: FMLA fuses the multiply-add and would break
// bit-equivalence with the scalar reference.

namespace wsed {
namespace kern {
namespace neon {

void axpy(std::size_t n, double a, const double *x, double *y) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vaddq_f64(vy, vmulq_f64(va, vld1q_f64(x + i)));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale(std::size_t n, double a, double *x) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
  }
  for (; i < n; ++i) x[i] *= a;
}

void vadd(std::size_t n, const double *a, const double *b, double *out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void vsub(std::size_t n, const double *a, const double *b, double *out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void vmul(std::size_t n, const double *a, const double *b, double *out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void vmax(std::size_t n, const double *a, const double *b, double *out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vmaxq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

double dot(std::size_t n, const double *a, const double *b) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1)) + tail;
}

double vsum(std::size_t n, const double *x) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vld1q_f64(x + i));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i];
  return (vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1)) + tail;
}

}  // namespace neon
}  // namespace kern
}  // namespace wsed

#endif  // aarch64
