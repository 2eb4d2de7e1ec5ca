// src/kernels.cpp

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

#include <cstdlib>
#include <cstring>

#include "wsed/errors.hpp"

namespace wsed {
namespace kern {

namespace {

struct Table {
  void (*axpy)(std::size_t, double, const double *, double *);
  void (*scale)(std::size_t, double, double *);
  void (*vadd)(std::size_t, const double *, const double *, double *);
  void (*vsub)(std::size_t, const double *, const double *, double *);
  void (*vmul)(std::size_t, const double *, const double *, double *);
  void (*vmax)(std::size_t, const double *, const double *, double *);
  double (*dot)(std::size_t, const double *, const double *);
  double (*vsum)(std::size_t, const double *);
};

constexpr Table kScalarTable = {
    scalar::axpy, scalar::scale, scalar::vadd, scalar::vsub,
    scalar::vmul, scalar::vmax,  scalar::dot,  scalar::vsum};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2Table = {avx2::axpy, avx2::scale, avx2::vadd, avx2::vsub,
                              avx2::vmul, avx2::vmax,  avx2::dot,  avx2::vsum};
#endif
#if defined(__aarch64__)
constexpr Table kNeonTable = {neon::axpy, neon::scale, neon::vadd, neon::vsub,
                              neon::vmul, neon::vmax,  neon::dot,  neon::vsum};
#endif

const Table *table_for(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::kAvx2:
      return &kAvx2Table;
#endif
#if defined(__aarch64__)
    case Backend::kNeon:
      return &kNeonTable;
#endif
    default:
      return nullptr;
  }
}

Backend detect_backend() {
  if (const char *env = std::getenv("WSED_BACKEND")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::kAvx2))
      return Backend::kAvx2;
    if (std::strcmp(env, "neon") == 0 && backend_available(Backend::kNeon))
      return Backend::kNeon;
    // Unknown or unavailable value: fall through to auto-detection.
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) return Backend::kAvx2;
#endif
#if defined(__aarch64__)
  return Backend::kNeon;
#endif
  return Backend::kScalar;
}

struct State {
  Backend backend;
  const Table *table;
  State() : backend(detect_backend()), table(table_for(backend)) {}
};

State &state() {
  static State s;
  return s;
}

}  // namespace

Backend active_backend() { return state().backend; }

bool backend_available(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw ConfigError(std::string("kernel backend unavailable: ") +
                      backend_name(b));
  }
  state().backend = b;
  state().table = table_for(b);
}

const char *backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

void axpy(std::size_t n, double a, const double *x, double *y) {
  state().table->axpy(n, a, x, y);
}
void scale(std::size_t n, double a, double *x) { state().table->scale(n, a, x); }
void vadd(std::size_t n, const double *a, const double *b, double *out) {
  state().table->vadd(n, a, b, out);
}
void vsub(std::size_t n, const double *a, const double *b, double *out) {
  state().table->vsub(n, a, b, out);
}
void vmul(std::size_t n, const double *a, const double *b, double *out) {
  state().table->vmul(n, a, b, out);
}
void vmax(std::size_t n, const double *a, const double *b, double *out) {
  state().table->vmax(n, a, b, out);
}
double dot(std::size_t n, const double *a, const double *b) {
  return state().table->dot(n, a, b);
}
double vsum(std::size_t n, const double *x) { return state().table->vsum(n, x); }

}  // namespace kern
}  // namespace wsed
