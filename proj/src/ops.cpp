// src/ops.cpp

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

#include "wsed/ops.hpp"

#include <cmath>
#include <cstddef>

#include "wsed/errors.hpp"
#include "wsed/kernels.hpp"

namespace wsed {

namespace {

void require_rank(const Tensor &t, int r, const char *op) {
  if (t.rank() != r) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(r) + " tensor, got " +
                         shape_str(t.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor &a, const Tensor &b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  int m = a.dim(0), p = a.dim(1), n = b.dim(1);
  if (b.dim(0) != p) {
    throw DimensionError("matmul: inner dimensions disagree, " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Tensor c({m, n});
  // i-k-j order: each output row accumulates scaled rows of b, which keeps
  // the inner loop on the axpy kernel and the summation order fixed.
  for (int i = 0; i < m; ++i) {
    double *crow = c.data() + static_cast<std::size_t>(i) * n;
    const double *arow = a.data() + static_cast<std::size_t>(i) * p;
    for (int k = 0; k < p; ++k) {
      kern::axpy(static_cast<std::size_t>(n), arow[k],
                 b.data() + static_cast<std::size_t>(k) * n, crow);
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor &a, const Tensor &b) {
  require_rank(a, 2, "matmul_nt");
  require_rank(b, 2, "matmul_nt");
  int m = a.dim(0), p = a.dim(1), n = b.dim(0);
  if (b.dim(1) != p) {
    throw DimensionError("matmul_nt: inner dimensions disagree, " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Tensor c({m, n});
  for (int i = 0; i < m; ++i) {
    const double *arow = a.data() + static_cast<std::size_t>(i) * p;
    double *crow = c.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      crow[j] = kern::dot(static_cast<std::size_t>(p), arow,
                          b.data() + static_cast<std::size_t>(j) * p);
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor &a, const Tensor &b) {
  require_rank(a, 2, "matmul_tn");
  require_rank(b, 2, "matmul_tn");
  int p = a.dim(0), m = a.dim(1), n = b.dim(1);
  if (b.dim(0) != p) {
    throw DimensionError("matmul_tn: inner dimensions disagree, " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Tensor c({m, n});
  for (int k = 0; k < p; ++k) {
    const double *arow = a.data() + static_cast<std::size_t>(k) * m;
    const double *brow = b.data() + static_cast<std::size_t>(k) * n;
    for (int i = 0; i < m; ++i) {
      kern::axpy(static_cast<std::size_t>(n), arow[i], brow,
                 c.data() + static_cast<std::size_t>(i) * n);
    }
  }
  return c;
}

namespace convdetail {

void pad_channel(const double *src, int t, int f, int pad_t, int pad_l,
                 int tp, int fp, double *dst) {
  for (int i = 0; i < tp * fp; ++i) dst[i] = 0.0;
  for (int r = 0; r < t; ++r) {
    const double *s = src + static_cast<std::size_t>(r) * f;
    double *d = dst + static_cast<std::size_t>(r + pad_t) * fp + pad_l;
    for (int c = 0; c < f; ++c) d[c] = s[c];
  }
}

}  // namespace convdetail

Tensor conv2d(const Tensor &x, const Tensor &k, Padding padding) {
  require_rank(x, 3, "conv2d");
  require_rank(k, 4, "conv2d");
  int cin = x.dim(0), t = x.dim(1), f = x.dim(2);
  int cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  if (k.dim(1) != cin) {
    throw DimensionError("conv2d: input channels disagree, " +
                         shape_str(x.shape()) + " vs " + shape_str(k.shape()));
  }
  int pad_t = 0, pad_l = 0, to = 0, fo = 0;
  if (padding == Padding::kSame) {
    // Total padding kh-1 / kw-1; the extra cell for even sizes trails.
    pad_t = (kh - 1) / 2;
    pad_l = (kw - 1) / 2;
    to = t;
    fo = f;
  } else {
    if (kh > t || kw > f) {
      throw DimensionError("conv2d: kernel " + shape_str(k.shape()) +
                           " larger than input " + shape_str(x.shape()) +
                           " under valid padding");
    }
    to = t - kh + 1;
    fo = f - kw + 1;
  }
  int tp = (padding == Padding::kSame) ? t + kh - 1 : t;
  int fp = (padding == Padding::kSame) ? f + kw - 1 : f;

  std::vector<double> padded(static_cast<std::size_t>(cin) * tp * fp);
  for (int ci = 0; ci < cin; ++ci) {
    convdetail::pad_channel(x.data() + static_cast<std::size_t>(ci) * t * f, t,
                            f, pad_t, pad_l, tp, fp,
                            padded.data() + static_cast<std::size_t>(ci) * tp *
                                                fp);
  }

  Tensor out({cout, to, fo});
  for (int co = 0; co < cout; ++co) {
    double *oc = out.data() + static_cast<std::size_t>(co) * to * fo;
    for (int ci = 0; ci < cin; ++ci) {
      const double *pc = padded.data() + static_cast<std::size_t>(ci) * tp * fp;
      for (int i = 0; i < kh; ++i) {
        for (int j = 0; j < kw; ++j) {
          double w = k(co, ci, i, j);
          if (w == 0.0) continue;
          for (int r = 0; r < to; ++r) {
            kern::axpy(static_cast<std::size_t>(fo), w,
                       pc + static_cast<std::size_t>(r + i) * fp + j,
                       oc + static_cast<std::size_t>(r) * fo);
          }
        }
      }
    }
  }
  return out;
}

Tensor sigmoid(const Tensor &x) {
  Tensor out(x.shape());
  const double *in = x.data();
  double *o = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = in[i];
    if (v >= 0.0) {
      o[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      double e = std::exp(v);
      o[i] = e / (1.0 + e);
    }
  }
  return out;
}

Tensor relu(const Tensor &x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = x.data()[i];
    out.data()[i] = v > 0.0 ? v : 0.0;
  }
  return out;
}

Tensor exp(const Tensor &x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = std::exp(x.data()[i]);
  return out;
}

Tensor clamp(const Tensor &x, double lo, double hi) {
  if (!(lo <= hi)) throw ArgumentError("clamp: lo > hi");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = x.data()[i];
    out.data()[i] = v < lo ? lo : (v > hi ? hi : v);
  }
  return out;
}

Tensor softmax(const Tensor &x, int axis) {
  if (x.rank() == 1) {
    if (axis != 0) throw ArgumentError("softmax: axis must be 0 for vectors");
    Tensor col({x.dim(0), 1}, x.vals());
    Tensor r = softmax(col, 0);
    return Tensor({x.dim(0)}, r.vals());
  }
  require_rank(x, 2, "softmax");
  if (axis != 0 && axis != 1) {
    throw ArgumentError("softmax: axis must be 0 or 1, got " +
                        std::to_string(axis));
  }
  int rows = x.dim(0), cols = x.dim(1);
  Tensor out({rows, cols});
  if (axis == 1) {
    for (int i = 0; i < rows; ++i) {
      const double *in = x.data() + static_cast<std::size_t>(i) * cols;
      double *o = out.data() + static_cast<std::size_t>(i) * cols;
      double m = in[0];
      for (int j = 1; j < cols; ++j) m = in[j] > m ? in[j] : m;
      double s = 0.0;
      for (int j = 0; j < cols; ++j) {
        o[j] = std::exp(in[j] - m);
        s += o[j];
      }
      for (int j = 0; j < cols; ++j) o[j] /= s;
    }
  } else {
    for (int j = 0; j < cols; ++j) {
      double m = x(0, j);
      for (int i = 1; i < rows; ++i) m = x(i, j) > m ? x(i, j) : m;
      double s = 0.0;
      for (int i = 0; i < rows; ++i) {
        double e = std::exp(x(i, j) - m);
        out(i, j) = e;
        s += e;
      }
      for (int i = 0; i < rows; ++i) out(i, j) /= s;
    }
  }
  return out;
}

Tensor avg_pool2d(const Tensor &x, int wh, int ww) {
  require_rank(x, 3, "avg_pool2d");
  if (wh < 1 || ww < 1) throw ArgumentError("avg_pool2d: window must be >= 1");
  int c = x.dim(0), t = x.dim(1), f = x.dim(2);
  int to = t / wh, fo = f / ww;
  if (to < 1 || fo < 1) {
    throw DimensionError("avg_pool2d: window " + std::to_string(wh) + "x" +
                         std::to_string(ww) + " larger than input " +
                         shape_str(x.shape()));
  }
  Tensor out({c, to, fo});
  double inv = 1.0 / (static_cast<double>(wh) * ww);
  for (int ci = 0; ci < c; ++ci) {
    for (int r = 0; r < to; ++r) {
      for (int cc = 0; cc < fo; ++cc) {
        double s = 0.0;
        for (int i = 0; i < wh; ++i) {
          for (int j = 0; j < ww; ++j) {
            s += x(ci, r * wh + i, cc * ww + j);
          }
        }
        out(ci, r, cc) = s * inv;
      }
    }
  }
  return out;
}

Tensor add(const Tensor &a, const Tensor &b) {
  check_same_shape(a, b, "add");
  Tensor out(a.shape());
  kern::vadd(a.size(), a.data(), b.data(), out.data());
  return out;
}

Tensor sub(const Tensor &a, const Tensor &b) {
  check_same_shape(a, b, "sub");
  Tensor out(a.shape());
  kern::vsub(a.size(), a.data(), b.data(), out.data());
  return out;
}

Tensor mul(const Tensor &a, const Tensor &b) {
  check_same_shape(a, b, "mul");
  Tensor out(a.shape());
  kern::vmul(a.size(), a.data(), b.data(), out.data());
  return out;
}

Tensor scale(const Tensor &a, double c) {
  Tensor out = a;
  kern::scale(out.size(), c, out.data());
  return out;
}

}  // namespace wsed
