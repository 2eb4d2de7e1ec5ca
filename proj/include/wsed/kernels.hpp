// wsed/kernels.hpp

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

#ifndef WSED_KERNELS_HPP_
#define WSED_KERNELS_HPP_

#include <cstddef>
#include <string>

namespace wsed {
namespace kern {

// Arithmetic inner loops behind all tensor work.  Each kernel exists as a
// plain scalar reference plus SIMD variants (AVX2 on x86-64, NEON on
// aarch64).  The active variant is picked once at startup from CPU features,
// overridable via set_backend() or the WSED_BACKEND environment variable
// (values: scalar, avx2, neon).
//
// Equivalence contract: the element-wise kernels (axpy, scale, vadd, vsub,
// vmul, vmax) produce bit-identical results across variants; the reduction
// kernels (dot, vsum) may differ by accumulation order and agree to a
// relative 1e-12.

enum class Backend { kScalar, kAvx2, kNeon };

// Backend chosen for the running process (auto-detected unless overridden).
Backend active_backend();

// True when the named variant can run on this machine.
bool backend_available(Backend b);

// Force a specific variant; throws ConfigError when unavailable.
void set_backend(Backend b);

const char *backend_name(Backend b);

// y[i] += a * x[i]
void axpy(std::size_t n, double a, const double *x, double *y);

// x[i] *= a
void scale(std::size_t n, double a, double *x);

// out[i] = a[i] + b[i]
void vadd(std::size_t n, const double *a, const double *b, double *out);

// out[i] = a[i] - b[i]
void vsub(std::size_t n, const double *a, const double *b, double *out);

// out[i] = a[i] * b[i]
void vmul(std::size_t n, const double *a, const double *b, double *out);

// out[i] = max(a[i], b[i])
void vmax(std::size_t n, const double *a, const double *b, double *out);

// sum_i a[i] * b[i]
double dot(std::size_t n, const double *a, const double *b);

// sum_i x[i]
double vsum(std::size_t n, const double *x);

// Per-variant entry points, exposed for the equivalence tests.
namespace scalar {
void axpy(std::size_t n, double a, const double *x, double *y);
void scale(std::size_t n, double a, double *x);
void vadd(std::size_t n, const double *a, const double *b, double *out);
void vsub(std::size_t n, const double *a, const double *b, double *out);
void vmul(std::size_t n, const double *a, const double *b, double *out);
void vmax(std::size_t n, const double *a, const double *b, double *out);
double dot(std::size_t n, const double *a, const double *b);
double vsum(std::size_t n, const double *x);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void axpy(std::size_t n, double a, const double *x, double *y);
void scale(std::size_t n, double a, double *x);
void vadd(std::size_t n, const double *a, const double *b, double *out);
void vsub(std::size_t n, const double *a, const double *b, double *out);
void vmul(std::size_t n, const double *a, const double *b, double *out);
void vmax(std::size_t n, const double *a, const double *b, double *out);
double dot(std::size_t n, const double *a, const double *b);
double vsum(std::size_t n, const double *x);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void axpy(std::size_t n, double a, const double *x, double *y);
void scale(std::size_t n, double a, double *x);
void vadd(std::size_t n, const double *a, const double *b, double *out);
void vsub(std::size_t n, const double *a, const double *b, double *out);
void vmul(std::size_t n, const double *a, const double *b, double *out);
void vmax(std::size_t n, const double *a, const double *b, double *out);
double dot(std::size_t n, const double *a, const double *b);
double vsum(std::size_t n, const double *x);
}  // namespace neon
#endif

}  // namespace kern
}  // namespace wsed

#endif  // WSED_KERNELS_HPP_
