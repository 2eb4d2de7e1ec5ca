// src/tape.cpp

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

#include "wsed/tape.hpp"

#include <cmath>
#include <cstddef>
#include <memory>
#include <utility>

#include "wsed/errors.hpp"
#include "wsed/kernels.hpp"

namespace wsed {

Var Tape::emit(Tensor value, bool requires_grad,
               std::function<void()> backprop) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node &Tape::node(Var v) {
  if (!v.valid() || v.id >= num_nodes()) {
    throw ArgumentError("tape: invalid node handle");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tape::Node &Tape::node(Var v) const {
  if (!v.valid() || v.id >= num_nodes()) {
    throw ArgumentError("tape: invalid node handle");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::input(Tensor v) { return emit(std::move(v), true, nullptr); }

Var Tape::constant(Tensor v) { return emit(std::move(v), false, nullptr); }

const Tensor &Tape::value(Var v) const { return node(v).value; }

const Tensor &Tape::grad(Var v) const {
  const Node &n = node(v);
  if (n.grad.size() == 0) {
    throw ArgumentError("tape: gradient requested before backward()");
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  Node &ln = node(loss);
  if (ln.value.size() != 1) {
    throw DimensionError("backward: loss must be scalar, got " +
                         shape_str(ln.value.shape()));
  }
  for (Node &n : nodes_) n.grad = Tensor(n.value.shape());
  ln.grad.data()[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node &n = nodes_[static_cast<std::size_t>(id)];
    if (n.requires_grad && n.backprop) n.backprop();
  }
  for (const Node &n : nodes_) {
    if (n.requires_grad && !n.grad.all_finite()) {
      throw NumericError("backward: non-finite gradient in tensor " +
                         shape_str(n.value.shape()));
    }
  }
}

// --- elementwise ---

Var Tape::add(Var a, Var b) {
  Tensor out = wsed::add(v(a.id), v(b.id));
  bool r = rg(a) || rg(b);
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, a, b, o]() {
    kern::axpy(g(o.id).size(), 1.0, g(o.id).data(), g(a.id).data());
    kern::axpy(g(o.id).size(), 1.0, g(o.id).data(), g(b.id).data());
  };
  return o;
}

Var Tape::sub(Var a, Var b) {
  Tensor out = wsed::sub(v(a.id), v(b.id));
  bool r = rg(a) || rg(b);
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, a, b, o]() {
    kern::axpy(g(o.id).size(), 1.0, g(o.id).data(), g(a.id).data());
    kern::axpy(g(o.id).size(), -1.0, g(o.id).data(), g(b.id).data());
  };
  return o;
}

Var Tape::mul(Var a, Var b) {
  Tensor out = wsed::mul(v(a.id), v(b.id));
  bool r = rg(a) || rg(b);
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, a, b, o]() {
    const Tensor &go = g(o.id);
    const Tensor &va = v(a.id);
    const Tensor &vb = v(b.id);
    Tensor &ga = g(a.id);
    Tensor &gb = g(b.id);
    for (std::size_t i = 0; i < go.size(); ++i) {
      ga.data()[i] += go.data()[i] * vb.data()[i];
      gb.data()[i] += go.data()[i] * va.data()[i];
    }
  };
  return o;
}

Var Tape::div(Var a, Var b) {
  check_same_shape(v(a.id), v(b.id), "div");
  const Tensor &va = v(a.id);
  const Tensor &vb = v(b.id);
  Tensor out(va.shape());
  for (std::size_t i = 0; i < va.size(); ++i) {
    out.data()[i] = va.data()[i] / vb.data()[i];
  }
  check_finite(out, "div");
  bool r = rg(a) || rg(b);
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, a, b, o]() {
    const Tensor &go = g(o.id);
    const Tensor &va2 = v(a.id);
    const Tensor &vb2 = v(b.id);
    Tensor &ga = g(a.id);
    Tensor &gb = g(b.id);
    for (std::size_t i = 0; i < go.size(); ++i) {
      double inv = 1.0 / vb2.data()[i];
      ga.data()[i] += go.data()[i] * inv;
      gb.data()[i] -= go.data()[i] * va2.data()[i] * inv * inv;
    }
  };
  return o;
}

Var Tape::scale(Var a, double c) { return affine(a, c, 0.0); }

Var Tape::affine(Var a, double m, double c) {
  const Tensor &va = v(a.id);
  Tensor out(va.shape());
  for (std::size_t i = 0; i < va.size(); ++i) {
    out.data()[i] = m * va.data()[i] + c;
  }
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o, m]() {
    kern::axpy(g(o.id).size(), m, g(o.id).data(), g(a.id).data());
  };
  return o;
}

Var Tape::sigmoid(Var a) {
  Tensor out = wsed::sigmoid(v(a.id));
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o]() {
    const Tensor &y = v(o.id);
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    for (std::size_t i = 0; i < go.size(); ++i) {
      double s = y.data()[i];
      ga.data()[i] += go.data()[i] * s * (1.0 - s);
    }
  };
  return o;
}

Var Tape::relu(Var a) {
  Tensor out = wsed::relu(v(a.id));
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o]() {
    const Tensor &x = v(a.id);
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    for (std::size_t i = 0; i < go.size(); ++i) {
      if (x.data()[i] > 0.0) ga.data()[i] += go.data()[i];
    }
  };
  return o;
}

Var Tape::exp(Var a) {
  Tensor out = wsed::exp(v(a.id));
  check_finite(out, "exp");
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o]() {
    const Tensor &y = v(o.id);
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    for (std::size_t i = 0; i < go.size(); ++i) {
      ga.data()[i] += go.data()[i] * y.data()[i];
    }
  };
  return o;
}

Var Tape::clamp(Var a, double lo, double hi) {
  Tensor out = wsed::clamp(v(a.id), lo, hi);
  Var o = emit(std::move(out), rg(a), nullptr);
  // Zero subgradient on and outside the clamp boundary.
  node(o).backprop = [this, a, o, lo, hi]() {
    const Tensor &x = v(a.id);
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    for (std::size_t i = 0; i < go.size(); ++i) {
      double xv = x.data()[i];
      if (xv > lo && xv < hi) ga.data()[i] += go.data()[i];
    }
  };
  return o;
}

// --- linear algebra ---

Var Tape::matmul(Var a, Var b) {
  Tensor out = wsed::matmul(v(a.id), v(b.id));
  bool r = rg(a) || rg(b);
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, a, b, o]() {
    Tensor da = wsed::matmul_nt(g(o.id), v(b.id));
    kern::axpy(da.size(), 1.0, da.data(), g(a.id).data());
    Tensor db = wsed::matmul_tn(v(a.id), g(o.id));
    kern::axpy(db.size(), 1.0, db.data(), g(b.id).data());
  };
  return o;
}

Var Tape::matmul_nt(Var a, Var b) {
  Tensor out = wsed::matmul_nt(v(a.id), v(b.id));
  bool r = rg(a) || rg(b);
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, a, b, o]() {
    Tensor da = wsed::matmul(g(o.id), v(b.id));
    kern::axpy(da.size(), 1.0, da.data(), g(a.id).data());
    Tensor db = wsed::matmul_tn(g(o.id), v(a.id));
    kern::axpy(db.size(), 1.0, db.data(), g(b.id).data());
  };
  return o;
}

Var Tape::transpose(Var a) {
  const Tensor &x = v(a.id);
  if (x.rank() != 2) {
    throw DimensionError("transpose: expected rank 2 tensor, got " +
                         shape_str(x.shape()));
  }
  int m = x.dim(0), n = x.dim(1);
  Tensor out({n, m});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) out(j, i) = x(i, j);
  }
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o, m, n]() {
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) ga(i, j) += go(j, i);
    }
  };
  return o;
}

// --- convolution stack ---

Var Tape::conv2d(Var x, Var k, Padding padding) {
  Tensor out = wsed::conv2d(v(x.id), v(k.id), padding);
  bool r = rg(x) || rg(k);
  const Tensor &xin = v(x.id);
  const Tensor &kin = v(k.id);
  int cin = xin.dim(0), t = xin.dim(1), f = xin.dim(2);
  int cout = kin.dim(0), kh = kin.dim(2), kw = kin.dim(3);
  int pad_t = (padding == Padding::kSame) ? (kh - 1) / 2 : 0;
  int pad_l = (padding == Padding::kSame) ? (kw - 1) / 2 : 0;
  int tp = (padding == Padding::kSame) ? t + kh - 1 : t;
  int fp = (padding == Padding::kSame) ? f + kw - 1 : f;
  int to = out.dim(1), fo = out.dim(2);

  // The padded input is needed again for both gradients; cache it.
  auto padded = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(cin) * tp * fp);
  for (int ci = 0; ci < cin; ++ci) {
    convdetail::pad_channel(
        xin.data() + static_cast<std::size_t>(ci) * t * f, t, f, pad_t, pad_l,
        tp, fp, padded->data() + static_cast<std::size_t>(ci) * tp * fp);
  }

  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, x, k, o, padded, cin, t, f, cout, kh, kw, pad_t,
                      pad_l, tp, fp, to, fo]() {
    const Tensor &go = g(o.id);
    const Tensor &kv = v(k.id);
    Tensor &gk = g(k.id);
    Tensor &gx = g(x.id);

    for (int co = 0; co < cout; ++co) {
      const double *gorow0 = go.data() + static_cast<std::size_t>(co) * to * fo;
      for (int ci = 0; ci < cin; ++ci) {
        const double *pc =
            padded->data() + static_cast<std::size_t>(ci) * tp * fp;
        for (int i = 0; i < kh; ++i) {
          for (int j = 0; j < kw; ++j) {
            double acc = 0.0;
            for (int r2 = 0; r2 < to; ++r2) {
              acc += kern::dot(static_cast<std::size_t>(fo),
                               gorow0 + static_cast<std::size_t>(r2) * fo,
                               pc + static_cast<std::size_t>(r2 + i) * fp + j);
            }
            gk(co, ci, i, j) += acc;
          }
        }
      }
    }

    std::vector<double> gpad(static_cast<std::size_t>(cin) * tp * fp, 0.0);
    for (int co = 0; co < cout; ++co) {
      const double *gorow0 = go.data() + static_cast<std::size_t>(co) * to * fo;
      for (int ci = 0; ci < cin; ++ci) {
        double *gp = gpad.data() + static_cast<std::size_t>(ci) * tp * fp;
        for (int i = 0; i < kh; ++i) {
          for (int j = 0; j < kw; ++j) {
            double w = kv(co, ci, i, j);
            if (w == 0.0) continue;
            for (int r2 = 0; r2 < to; ++r2) {
              kern::axpy(static_cast<std::size_t>(fo), w,
                         gorow0 + static_cast<std::size_t>(r2) * fo,
                         gp + static_cast<std::size_t>(r2 + i) * fp + j);
            }
          }
        }
      }
    }
    for (int ci = 0; ci < cin; ++ci) {
      const double *gp = gpad.data() + static_cast<std::size_t>(ci) * tp * fp;
      for (int r2 = 0; r2 < t; ++r2) {
        const double *src = gp + static_cast<std::size_t>(r2 + pad_t) * fp +
                            pad_l;
        double *dst = gx.data() + (static_cast<std::size_t>(ci) * t + r2) * f;
        for (int c2 = 0; c2 < f; ++c2) dst[c2] += src[c2];
      }
    }
  };
  return o;
}

Var Tape::channel_bias(Var x, Var b) {
  const Tensor &xin = v(x.id);
  const Tensor &bin = v(b.id);
  if (xin.rank() != 3 || bin.rank() != 1 || bin.dim(0) != xin.dim(0)) {
    throw DimensionError("channel_bias: incompatible shapes " +
                         shape_str(xin.shape()) + " vs " +
                         shape_str(bin.shape()));
  }
  int c = xin.dim(0);
  std::size_t plane = static_cast<std::size_t>(xin.dim(1)) * xin.dim(2);
  Tensor out = xin;
  for (int ci = 0; ci < c; ++ci) {
    double bc = bin(ci);
    double *p = out.data() + static_cast<std::size_t>(ci) * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] += bc;
  }
  bool r = rg(x) || rg(b);
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, x, b, o, c, plane]() {
    const Tensor &go = g(o.id);
    kern::axpy(go.size(), 1.0, go.data(), g(x.id).data());
    Tensor &gb = g(b.id);
    for (int ci = 0; ci < c; ++ci) {
      gb(ci) += kern::vsum(plane,
                           go.data() + static_cast<std::size_t>(ci) * plane);
    }
  };
  return o;
}

Var Tape::col_bias(Var x, Var b) {
  const Tensor &xin = v(x.id);
  const Tensor &bin = v(b.id);
  if (xin.rank() != 2 || bin.rank() != 1 || bin.dim(0) != xin.dim(1)) {
    throw DimensionError("col_bias: incompatible shapes " +
                         shape_str(xin.shape()) + " vs " +
                         shape_str(bin.shape()));
  }
  int rows = xin.dim(0), cols = xin.dim(1);
  Tensor out = xin;
  for (int i = 0; i < rows; ++i) {
    kern::axpy(static_cast<std::size_t>(cols), 1.0, bin.data(),
               out.data() + static_cast<std::size_t>(i) * cols);
  }
  bool r = rg(x) || rg(b);
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, x, b, o, rows, cols]() {
    const Tensor &go = g(o.id);
    kern::axpy(go.size(), 1.0, go.data(), g(x.id).data());
    Tensor &gb = g(b.id);
    for (int i = 0; i < rows; ++i) {
      kern::axpy(static_cast<std::size_t>(cols), 1.0,
                 go.data() + static_cast<std::size_t>(i) * cols, gb.data());
    }
  };
  return o;
}

Var Tape::avg_pool2d(Var x, int wh, int ww) {
  Tensor out = wsed::avg_pool2d(v(x.id), wh, ww);
  int c = out.dim(0), to = out.dim(1), fo = out.dim(2);
  Var o = emit(std::move(out), rg(x), nullptr);
  node(o).backprop = [this, x, o, wh, ww, c, to, fo]() {
    const Tensor &go = g(o.id);
    Tensor &gx = g(x.id);
    double inv = 1.0 / (static_cast<double>(wh) * ww);
    for (int ci = 0; ci < c; ++ci) {
      for (int r = 0; r < to; ++r) {
        for (int cc = 0; cc < fo; ++cc) {
          double gval = go(ci, r, cc) * inv;
          for (int i = 0; i < wh; ++i) {
            for (int j = 0; j < ww; ++j) {
              gx(ci, r * wh + i, cc * ww + j) += gval;
            }
          }
        }
      }
    }
  };
  return o;
}

Var Tape::avg_pool_2x2_s1(Var x) {
  const Tensor &xin = v(x.id);
  if (xin.rank() != 3) {
    throw DimensionError("avg_pool_2x2_s1: expected rank 3 tensor, got " +
                         shape_str(xin.shape()));
  }
  int c = xin.dim(0), t = xin.dim(1), f = xin.dim(2);
  Tensor out({c, t, f});
  for (int ci = 0; ci < c; ++ci) {
    for (int r = 0; r < t; ++r) {
      int rh = r + 1 < t ? 2 : 1;
      for (int cc = 0; cc < f; ++cc) {
        int cw = cc + 1 < f ? 2 : 1;
        double s = 0.0;
        for (int i = 0; i < rh; ++i) {
          for (int j = 0; j < cw; ++j) s += xin(ci, r + i, cc + j);
        }
        out(ci, r, cc) = s / (rh * cw);
      }
    }
  }
  Var o = emit(std::move(out), rg(x), nullptr);
  node(o).backprop = [this, x, o, c, t, f]() {
    const Tensor &go = g(o.id);
    Tensor &gx = g(x.id);
    for (int ci = 0; ci < c; ++ci) {
      for (int r = 0; r < t; ++r) {
        int rh = r + 1 < t ? 2 : 1;
        for (int cc = 0; cc < f; ++cc) {
          int cw = cc + 1 < f ? 2 : 1;
          double gval = go(ci, r, cc) / (rh * cw);
          for (int i = 0; i < rh; ++i) {
            for (int j = 0; j < cw; ++j) gx(ci, r + i, cc + j) += gval;
          }
        }
      }
    }
  };
  return o;
}

Var Tape::concat_channels(const std::vector<Var> &parts) {
  if (parts.empty()) throw ArgumentError("concat_channels: no inputs");
  int t = v(parts[0].id).dim(1), f = v(parts[0].id).dim(2);
  int ctotal = 0;
  bool r = false;
  for (Var p : parts) {
    const Tensor &pv = v(p.id);
    if (pv.rank() != 3 || pv.dim(1) != t || pv.dim(2) != f) {
      throw DimensionError("concat_channels: part shape " +
                           shape_str(pv.shape()) +
                           " incompatible with first part " +
                           shape_str(v(parts[0].id).shape()));
    }
    ctotal += pv.dim(0);
    r = r || rg(p);
  }
  Tensor out({ctotal, t, f});
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor &pv = v(p.id);
    for (std::size_t i = 0; i < pv.size(); ++i) out.data()[off + i] = pv.data()[i];
    off += pv.size();
  }
  std::vector<Var> ps = parts;
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, ps, o]() {
    const Tensor &go = g(o.id);
    std::size_t off2 = 0;
    for (Var p : ps) {
      Tensor &gp = g(p.id);
      kern::axpy(gp.size(), 1.0, go.data() + off2, gp.data());
      off2 += gp.size();
    }
  };
  return o;
}

Var Tape::freq_mean(Var x) {
  const Tensor &xin = v(x.id);
  if (xin.rank() != 3) {
    throw DimensionError("freq_mean: expected rank 3 tensor, got " +
                         shape_str(xin.shape()));
  }
  int c = xin.dim(0), t = xin.dim(1), f = xin.dim(2);
  Tensor out({t, c});
  double inv = 1.0 / f;
  for (int ci = 0; ci < c; ++ci) {
    for (int r = 0; r < t; ++r) {
      out(r, ci) =
          inv * kern::vsum(static_cast<std::size_t>(f),
                           xin.data() + (static_cast<std::size_t>(ci) * t + r) *
                                            f);
    }
  }
  Var o = emit(std::move(out), rg(x), nullptr);
  node(o).backprop = [this, x, o, c, t, f, inv]() {
    const Tensor &go = g(o.id);
    Tensor &gx = g(x.id);
    for (int ci = 0; ci < c; ++ci) {
      for (int r = 0; r < t; ++r) {
        double gval = go(r, ci) * inv;
        double *p = gx.data() + (static_cast<std::size_t>(ci) * t + r) * f;
        for (int j = 0; j < f; ++j) p[j] += gval;
      }
    }
  };
  return o;
}

// --- softmax / reductions ---

Var Tape::softmax_rows(Var a) {
  Tensor out = wsed::softmax(v(a.id), 1);
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o]() {
    const Tensor &y = v(o.id);
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    int rows = y.dim(0), cols = y.dim(1);
    for (int i = 0; i < rows; ++i) {
      const double *yr = y.data() + static_cast<std::size_t>(i) * cols;
      const double *gr = go.data() + static_cast<std::size_t>(i) * cols;
      double inner = kern::dot(static_cast<std::size_t>(cols), yr, gr);
      double *gar = ga.data() + static_cast<std::size_t>(i) * cols;
      for (int j = 0; j < cols; ++j) gar[j] += (gr[j] - inner) * yr[j];
    }
  };
  return o;
}

Var Tape::softmax_cols(Var a) {
  Tensor out = wsed::softmax(v(a.id), 0);
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o]() {
    const Tensor &y = v(o.id);
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    int rows = y.dim(0), cols = y.dim(1);
    for (int j = 0; j < cols; ++j) {
      double inner = 0.0;
      for (int i = 0; i < rows; ++i) inner += y(i, j) * go(i, j);
      for (int i = 0; i < rows; ++i) {
        ga(i, j) += (go(i, j) - inner) * y(i, j);
      }
    }
  };
  return o;
}

Var Tape::colsum(Var a) {
  const Tensor &x = v(a.id);
  if (x.rank() != 2) {
    throw DimensionError("colsum: expected rank 2 tensor, got " +
                         shape_str(x.shape()));
  }
  int rows = x.dim(0), cols = x.dim(1);
  Tensor out({cols});
  for (int i = 0; i < rows; ++i) {
    kern::axpy(static_cast<std::size_t>(cols), 1.0,
               x.data() + static_cast<std::size_t>(i) * cols, out.data());
  }
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o, rows, cols]() {
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    for (int i = 0; i < rows; ++i) {
      kern::axpy(static_cast<std::size_t>(cols), 1.0, go.data(),
                 ga.data() + static_cast<std::size_t>(i) * cols);
    }
  };
  return o;
}

Var Tape::colmax(Var a) {
  const Tensor &x = v(a.id);
  if (x.rank() != 2) {
    throw DimensionError("colmax: expected rank 2 tensor, got " +
                         shape_str(x.shape()));
  }
  int rows = x.dim(0), cols = x.dim(1);
  Tensor out({cols});
  auto argmax = std::make_shared<std::vector<int>>(cols, 0);
  for (int j = 0; j < cols; ++j) {
    double best = x(0, j);
    int bi = 0;
    for (int i = 1; i < rows; ++i) {
      if (x(i, j) > best) {
        best = x(i, j);
        bi = i;
      }
    }
    out(j) = best;
    (*argmax)[static_cast<std::size_t>(j)] = bi;
  }
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o, argmax, cols]() {
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    for (int j = 0; j < cols; ++j) {
      ga((*argmax)[static_cast<std::size_t>(j)], j) += go(j);
    }
  };
  return o;
}

Var Tape::div_cols(Var x, Var s) {
  const Tensor &xin = v(x.id);
  const Tensor &sin = v(s.id);
  if (xin.rank() != 2 || sin.rank() != 1 || sin.dim(0) != xin.dim(1)) {
    throw DimensionError("div_cols: incompatible shapes " +
                         shape_str(xin.shape()) + " vs " +
                         shape_str(sin.shape()));
  }
  int rows = xin.dim(0), cols = xin.dim(1);
  Tensor out({rows, cols});
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = xin(i, j) / sin(j);
  }
  check_finite(out, "div_cols");
  bool r = rg(x) || rg(s);
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, x, s, o, rows, cols]() {
    const Tensor &go = g(o.id);
    const Tensor &xv = v(x.id);
    const Tensor &sv = v(s.id);
    Tensor &gx = g(x.id);
    Tensor &gs = g(s.id);
    for (int j = 0; j < cols; ++j) {
      double inv = 1.0 / sv(j);
      double acc = 0.0;
      for (int i = 0; i < rows; ++i) {
        gx(i, j) += go(i, j) * inv;
        acc += go(i, j) * xv(i, j);
      }
      gs(j) -= acc * inv * inv;
    }
  };
  return o;
}

Var Tape::window_mean(Var x, int win) {
  const Tensor &xin = v(x.id);
  if (xin.rank() != 2) {
    throw DimensionError("window_mean: expected rank 2 tensor, got " +
                         shape_str(xin.shape()));
  }
  if (win < 1) throw ArgumentError("window_mean: window must be >= 1");
  int rows = xin.dim(0), cols = xin.dim(1);
  int s = (rows + win - 1) / win;
  Tensor out({s, cols});
  for (int si = 0; si < s; ++si) {
    int lo = si * win;
    int hi = lo + win < rows ? lo + win : rows;
    double inv = 1.0 / (hi - lo);
    for (int i = lo; i < hi; ++i) {
      kern::axpy(static_cast<std::size_t>(cols), inv,
                 xin.data() + static_cast<std::size_t>(i) * cols,
                 out.data() + static_cast<std::size_t>(si) * cols);
    }
  }
  Var o = emit(std::move(out), rg(x), nullptr);
  node(o).backprop = [this, x, o, win, rows, cols, s]() {
    const Tensor &go = g(o.id);
    Tensor &gx = g(x.id);
    for (int si = 0; si < s; ++si) {
      int lo = si * win;
      int hi = lo + win < rows ? lo + win : rows;
      double inv = 1.0 / (hi - lo);
      for (int i = lo; i < hi; ++i) {
        kern::axpy(static_cast<std::size_t>(cols), inv,
                   go.data() + static_cast<std::size_t>(si) * cols,
                   gx.data() + static_cast<std::size_t>(i) * cols);
      }
    }
  };
  return o;
}

Var Tape::sum(Var a) {
  double s = kern::vsum(v(a.id).size(), v(a.id).data());
  Var o = emit(Tensor::scalar(s), rg(a), nullptr);
  node(o).backprop = [this, a, o]() {
    double gs = g(o.id)(0);
    Tensor &ga = g(a.id);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += gs;
  };
  return o;
}

Var Tape::add_n(const std::vector<Var> &parts) {
  if (parts.empty()) throw ArgumentError("add_n: no inputs");
  Tensor out = v(parts[0].id);
  bool r = rg(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    check_same_shape(out, v(parts[i].id), "add_n");
    kern::axpy(out.size(), 1.0, v(parts[i].id).data(), out.data());
    r = r || rg(parts[i]);
  }
  std::vector<Var> ps = parts;
  Var o = emit(std::move(out), r, nullptr);
  node(o).backprop = [this, ps, o]() {
    const Tensor &go = g(o.id);
    for (Var p : ps) {
      kern::axpy(go.size(), 1.0, go.data(), g(p.id).data());
    }
  };
  return o;
}

Var Tape::reshape(Var a, std::vector<int> shape) {
  const Tensor &x = v(a.id);
  Tensor out(shape, x.vals());
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o]() {
    kern::axpy(g(o.id).size(), 1.0, g(o.id).data(), g(a.id).data());
  };
  return o;
}

// --- losses / normalization ---

Var Tape::bce(Var pred, Var target, double eps) {
  const Tensor &p = v(pred.id);
  const Tensor &t = v(target.id);
  check_same_shape(p, t, "bce");
  if (rg(target)) {
    throw ArgumentError("bce: target must be a constant node");
  }
  if (!(eps > 0.0 && eps < 0.5)) {
    throw ArgumentError("bce: eps must lie in (0, 0.5)");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double ph = p.data()[i];
    ph = ph < eps ? eps : (ph > 1.0 - eps ? 1.0 - eps : ph);
    double tv = t.data()[i];
    loss -= tv * std::log(ph) + (1.0 - tv) * std::log(1.0 - ph);
  }
  Var o = emit(Tensor::scalar(loss), rg(pred), nullptr);
  node(o).backprop = [this, pred, target, o, eps]() {
    double gs = g(o.id)(0);
    const Tensor &pv = v(pred.id);
    const Tensor &tv = v(target.id);
    Tensor &gp = g(pred.id);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      double ph = pv.data()[i];
      if (ph <= eps || ph >= 1.0 - eps) continue;
      gp.data()[i] += gs * (ph - tv.data()[i]) / (ph * (1.0 - ph));
    }
  };
  return o;
}

Var Tape::layer_norm_rows(Var a) {
  const Tensor &x = v(a.id);
  if (x.rank() != 2) {
    throw DimensionError("layer_norm_rows: expected rank 2 tensor, got " +
                         shape_str(x.shape()));
  }
  constexpr double kEps = 1e-5;
  int rows = x.dim(0), cols = x.dim(1);
  Tensor out({rows, cols});
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  for (int i = 0; i < rows; ++i) {
    const double *xr = x.data() + static_cast<std::size_t>(i) * cols;
    double mean = kern::vsum(static_cast<std::size_t>(cols), xr) / cols;
    double var = 0.0;
    for (int j = 0; j < cols; ++j) {
      double d = xr[j] - mean;
      var += d * d;
    }
    var /= cols;
    double is = 1.0 / std::sqrt(var + kEps);
    (*inv_std)[static_cast<std::size_t>(i)] = is;
    double *orow = out.data() + static_cast<std::size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) orow[j] = (xr[j] - mean) * is;
  }
  Var o = emit(std::move(out), rg(a), nullptr);
  node(o).backprop = [this, a, o, inv_std, rows, cols]() {
    const Tensor &y = v(o.id);
    const Tensor &go = g(o.id);
    Tensor &ga = g(a.id);
    for (int i = 0; i < rows; ++i) {
      const double *yr = y.data() + static_cast<std::size_t>(i) * cols;
      const double *gr = go.data() + static_cast<std::size_t>(i) * cols;
      double mg = kern::vsum(static_cast<std::size_t>(cols), gr) / cols;
      double mgy = kern::dot(static_cast<std::size_t>(cols), gr, yr) / cols;
      double is = (*inv_std)[static_cast<std::size_t>(i)];
      double *gar = ga.data() + static_cast<std::size_t>(i) * cols;
      for (int j = 0; j < cols; ++j) {
        gar[j] += is * (gr[j] - mg - yr[j] * mgy);
      }
    }
  };
  return o;
}

// --- finite-difference checking ---

double grad_check(const TapeFn &fn, const std::vector<Tensor> &inputs,
                  double delta) {
  if (!(delta > 0.0)) throw ArgumentError("grad_check: delta must be positive");

  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor &t : inputs) vars.push_back(tape.input(t));
  Var out = fn(tape, vars);
  if (tape.value(out).size() != 1) out = tape.sum(out);
  check_finite(tape.value(out), "grad_check");
  tape.backward(out);
  std::vector<Tensor> analytic;
  analytic.reserve(inputs.size());
  for (Var v : vars) analytic.push_back(tape.grad(v));

  auto eval = [&fn](const std::vector<Tensor> &xs) {
    Tape t2;
    std::vector<Var> vs;
    vs.reserve(xs.size());
    for (const Tensor &x : xs) vs.push_back(t2.constant(x));
    Var o = fn(t2, vs);
    const Tensor &val = t2.value(o);
    double j = kern::vsum(val.size(), val.data());
    if (!std::isfinite(j)) {
      throw NumericError("grad_check: non-finite objective");
    }
    return j;
  };

  double max_rel = 0.0;
  std::vector<Tensor> probe = inputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t e = 0; e < inputs[i].size(); ++e) {
      double keep = probe[i].data()[e];
      probe[i].data()[e] = keep + delta;
      double jp = eval(probe);
      probe[i].data()[e] = keep - delta;
      double jm = eval(probe);
      probe[i].data()[e] = keep;
      double numeric = (jp - jm) / (2.0 * delta);
      double a = analytic[i].data()[e];
      double denom = std::abs(a);
      if (std::abs(numeric) > denom) denom = std::abs(numeric);
      if (denom < 1.0) denom = 1.0;
      double rel = std::abs(a - numeric) / denom;
      if (rel > max_rel) max_rel = rel;
    }
  }
  return max_rel;
}

}  // namespace wsed
