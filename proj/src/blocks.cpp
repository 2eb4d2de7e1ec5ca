// src/blocks.cpp

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

#include "wsed/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "wsed/errors.hpp"

namespace wsed {

namespace {

constexpr double kLocLogitClip = 30.0;

void fill_uniform(Rng &rng, Tensor &t, double bound) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.data()[i] = rng.uniform(-bound, bound);
  }
}

Tensor init_matrix(Rng &rng, int rows, int cols, int fan_in) {
  Tensor t({rows, cols});
  fill_uniform(rng, t, 1.0 / std::sqrt(static_cast<double>(fan_in)));
  return t;
}

}  // namespace

// --- GLU ---

void validate(const GluBlockParams &p) {
  if (p.w.rank() != 4 || !p.w.same_shape(p.v)) {
    throw ConfigError("glu: W and V must be rank-4 tensors of identical "
                      "shape, got " + shape_str(p.w.shape()) + " vs " +
                      shape_str(p.v.shape()));
  }
  if (p.b.rank() != 1 || p.c.rank() != 1 || p.b.dim(0) != p.w.dim(0) ||
      p.c.dim(0) != p.w.dim(0)) {
    throw ConfigError("glu: biases must have one entry per output channel");
  }
}

GluBlockParams init_glu(Rng &rng, int cin, int cout, int kh, int kw) {
  if (cin < 1 || cout < 1 || kh < 1 || kw < 1) {
    throw ConfigError("glu: channel and kernel dims must be >= 1");
  }
  double bound = 1.0 / std::sqrt(static_cast<double>(cin) * kh * kw);
  GluBlockParams p;
  p.w = Tensor({cout, cin, kh, kw});
  fill_uniform(rng, p.w, bound);
  p.b = Tensor({cout});
  fill_uniform(rng, p.b, bound);
  p.v = Tensor({cout, cin, kh, kw});
  fill_uniform(rng, p.v, bound);
  p.c = Tensor({cout});
  fill_uniform(rng, p.c, bound);
  return p;
}

GluVars lift(Tape &t, const GluBlockParams &p, bool trainable) {
  validate(p);
  GluVars v;
  v.w = trainable ? t.input(p.w) : t.constant(p.w);
  v.b = trainable ? t.input(p.b) : t.constant(p.b);
  v.v = trainable ? t.input(p.v) : t.constant(p.v);
  v.c = trainable ? t.input(p.c) : t.constant(p.c);
  return v;
}

Var glu_forward(Tape &t, Var x, const GluVars &p) {
  Var lin = t.channel_bias(t.conv2d(x, p.w, Padding::kSame), p.b);
  Var gate = t.sigmoid(t.channel_bias(t.conv2d(x, p.v, Padding::kSame), p.c));
  return t.mul(lin, gate);
}

Tensor glu_forward(const Tensor &x, const GluBlockParams &p) {
  Tape t;
  Var xv = t.constant(x);
  return t.value(glu_forward(t, xv, lift(t, p, false)));
}

// --- inception ---

void validate(const InceptionAttentionConfig &cfg) {
  if (cfg.branches.empty()) {
    throw ConfigError("inception: at least one branch required");
  }
  int total = 0;
  for (const InceptionBranchSpec &b : cfg.branches) {
    if (b.filters < 1 || b.kernel_h < 1 || b.kernel_w < 1) {
      throw ConfigError("inception: branch kernel and filter counts must be "
                        ">= 1");
    }
    total += b.filters;
  }
  if (total != cfg.budget) {
    throw ConfigError("inception: branch filters sum to " +
                      std::to_string(total) + ", budget is " +
                      std::to_string(cfg.budget));
  }
}

namespace {

// Splits `budget` across branches proportionally to `fractions` (which sum
// to 1), assigning leftovers by largest remainder.
std::vector<int> apportion(int budget, const std::vector<double> &fractions) {
  int n = static_cast<int>(fractions.size());
  if (budget < n) {
    throw ConfigError("inception: budget " + std::to_string(budget) +
                      " too small for " + std::to_string(n) + " branches");
  }
  std::vector<int> out(n);
  std::vector<std::pair<double, int>> rem(n);
  int used = 0;
  for (int i = 0; i < n; ++i) {
    double exact = fractions[static_cast<std::size_t>(i)] * budget;
    out[static_cast<std::size_t>(i)] = static_cast<int>(exact);
    rem[static_cast<std::size_t>(i)] = {
        exact - out[static_cast<std::size_t>(i)], i};
    used += out[static_cast<std::size_t>(i)];
  }
  std::sort(rem.begin(), rem.end(), [](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; used < budget; ++i, ++used) {
    out[static_cast<std::size_t>(rem[static_cast<std::size_t>(i % n)].second)]++;
  }
  return out;
}

InceptionAttentionConfig make_preset(int budget,
                                     const std::vector<int> &kernels,
                                     const std::vector<double> &fractions,
                                     const char *variant) {
  std::vector<int> filters = apportion(budget, fractions);
  InceptionAttentionConfig cfg;
  cfg.budget = budget;
  cfg.variant = variant;
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    InceptionBranchSpec b;
    b.kernel_h = kernels[i];
    b.kernel_w = kernels[i];
    b.filters = filters[i];
    b.pre_op = InceptionPreOp::kNone;
    cfg.branches.push_back(b);
  }
  // Pooled branch: stride-1 average pooling followed by a 1x1 gated conv.
  InceptionBranchSpec pool;
  pool.kernel_h = 1;
  pool.kernel_w = 1;
  pool.filters = filters.back();
  pool.pre_op = InceptionPreOp::kAvgPool2x2S1;
  cfg.branches.push_back(pool);
  validate(cfg);
  return cfg;
}

}  // namespace

InceptionAttentionConfig inception_v1(int budget) {
  // {1x1: 1/4, 3x3: 1/2, 5x5: 1/8} + pooled 1/8.
  InceptionAttentionConfig cfg = make_preset(
      budget, {1, 3, 5}, {0.25, 0.5, 0.125, 0.125}, "v1");
  return cfg;
}

InceptionAttentionConfig inception_v2(int budget) {
  // v1 with 8/64 of the 3x3 share moved to a 15x15 branch.
  return make_preset(budget, {1, 3, 5, 15},
                     {0.25, 0.375, 0.125, 0.125, 0.125}, "v2");
}

InceptionAttentionConfig inception_v3(int budget) {
  // v2 with 8/64 more moved from 3x3 to a 25x25 branch.
  return make_preset(budget, {1, 3, 5, 15, 25},
                     {0.25, 0.25, 0.125, 0.125, 0.125, 0.125}, "v3");
}

InceptionAttentionParams init_inception(Rng &rng, int cin,
                                        const InceptionAttentionConfig &cfg) {
  validate(cfg);
  InceptionAttentionParams p;
  for (const InceptionBranchSpec &spec : cfg.branches) {
    InceptionBranchParams bp;
    int glu_cin = cin;
    if (spec.pre_op == InceptionPreOp::kConv1x1) {
      double bound = 1.0 / std::sqrt(static_cast<double>(cin));
      bp.pre_w = Tensor({spec.filters, cin, 1, 1});
      fill_uniform(rng, bp.pre_w, bound);
      bp.pre_b = Tensor({spec.filters});
      fill_uniform(rng, bp.pre_b, bound);
      glu_cin = spec.filters;
    }
    bp.glu = init_glu(rng, glu_cin, spec.filters, spec.kernel_h, spec.kernel_w);
    p.branches.push_back(std::move(bp));
  }
  return p;
}

InceptionVars lift(Tape &t, const InceptionAttentionParams &p,
                   bool trainable) {
  InceptionVars out;
  for (const InceptionBranchParams &bp : p.branches) {
    InceptionBranchVars bv;
    if (bp.pre_w.size() > 0) {
      bv.has_pre = true;
      bv.pre_w = trainable ? t.input(bp.pre_w) : t.constant(bp.pre_w);
      bv.pre_b = trainable ? t.input(bp.pre_b) : t.constant(bp.pre_b);
    }
    bv.glu = lift(t, bp.glu, trainable);
    out.branches.push_back(bv);
  }
  return out;
}

Var inception_attention_forward(Tape &t, Var x,
                                const InceptionAttentionConfig &cfg,
                                const InceptionVars &p) {
  validate(cfg);
  if (p.branches.size() != cfg.branches.size()) {
    throw ConfigError("inception: config lists " +
                      std::to_string(cfg.branches.size()) +
                      " branches but params hold " +
                      std::to_string(p.branches.size()));
  }
  std::vector<Var> outs;
  for (std::size_t i = 0; i < cfg.branches.size(); ++i) {
    const InceptionBranchSpec &spec = cfg.branches[i];
    const InceptionBranchVars &bv = p.branches[i];
    Var h = x;
    switch (spec.pre_op) {
      case InceptionPreOp::kNone:
        break;
      case InceptionPreOp::kAvgPool2x2S1:
        h = t.avg_pool_2x2_s1(h);
        break;
      case InceptionPreOp::kConv1x1:
        if (!bv.has_pre) {
          throw ConfigError("inception: branch requests a 1x1 pre-conv but "
                            "params carry none");
        }
        h = t.channel_bias(t.conv2d(h, bv.pre_w, Padding::kSame), bv.pre_b);
        break;
    }
    outs.push_back(glu_forward(t, h, bv.glu));
  }
  return outs.size() == 1 ? outs[0] : t.concat_channels(outs);
}

Tensor inception_attention_forward(const Tensor &x,
                                   const InceptionAttentionConfig &cfg,
                                   const InceptionAttentionParams &p) {
  Tape t;
  Var xv = t.constant(x);
  return t.value(inception_attention_forward(t, xv, cfg, lift(t, p, false)));
}

// --- transformer ---

void validate(const TransformerLayerParams &p) {
  if (p.wq.rank() != 2 || p.wk.rank() != 2 || p.wv.rank() != 2) {
    throw ConfigError("transformer: W_Q, W_K, W_V must be matrices");
  }
  int c = p.wq.dim(0);
  if (p.wk.dim(0) != c || p.wv.dim(0) != c) {
    throw ConfigError("transformer: W_Q, W_K, W_V must share the input dim, "
                      "got " + shape_str(p.wq.shape()) + ", " +
                      shape_str(p.wk.shape()) + ", " +
                      shape_str(p.wv.shape()));
  }
  if (p.wk.dim(1) != p.wq.dim(1)) {
    throw ConfigError("transformer: W_Q and W_K must share d_k, got " +
                      shape_str(p.wq.shape()) + " vs " +
                      shape_str(p.wk.shape()));
  }
  if (p.residual_norm && p.wv.dim(1) != c) {
    throw ConfigError("transformer: residual_norm requires d_v == C, got " +
                      shape_str(p.wv.shape()));
  }
}

TransformerLayerParams init_transformer(Rng &rng, int c, int d_k, int d_v) {
  if (c < 1 || d_k < 1 || d_v < 1) {
    throw ConfigError("transformer: dims must be >= 1");
  }
  TransformerLayerParams p;
  p.wq = init_matrix(rng, c, d_k, c);
  p.wk = init_matrix(rng, c, d_k, c);
  p.wv = init_matrix(rng, c, d_v, c);
  return p;
}

TransformerVars lift(Tape &t, const TransformerLayerParams &p,
                     bool trainable) {
  validate(p);
  TransformerVars v;
  v.wq = trainable ? t.input(p.wq) : t.constant(p.wq);
  v.wk = trainable ? t.input(p.wk) : t.constant(p.wk);
  v.wv = trainable ? t.input(p.wv) : t.constant(p.wv);
  v.residual_norm = p.residual_norm;
  return v;
}

Var transformer_encoder_forward(Tape &t, Var x, const TransformerVars &p) {
  int d_k = t.value(p.wq).dim(1);
  Var q = t.matmul(x, p.wq);
  Var k = t.matmul(x, p.wk);
  Var v = t.matmul(x, p.wv);
  Var scores = t.scale(t.matmul_nt(q, k), 1.0 / std::sqrt(double(d_k)));
  Var attn = t.softmax_rows(scores);
  Var h = t.matmul(attn, v);
  if (p.residual_norm) {
    h = t.layer_norm_rows(t.add(x, h));
  }
  return h;
}

Tensor transformer_encoder_forward(const Tensor &x,
                                   const TransformerLayerParams &p) {
  Tape t;
  Var xv = t.constant(x);
  return t.value(transformer_encoder_forward(t, xv, lift(t, p, false)));
}

// --- heads ---

void validate(const HeadParams &p) {
  if (p.cls_w.rank() != 2 || p.loc_w.rank() != 2 || p.cls_b.rank() != 1 ||
      p.loc_b.rank() != 1) {
    throw ConfigError("heads: weights must be matrices, biases vectors");
  }
  if (!p.cls_w.same_shape(p.loc_w) || p.cls_b.dim(0) != p.cls_w.dim(1) ||
      p.loc_b.dim(0) != p.loc_w.dim(1)) {
    throw ConfigError("heads: classification and localization shapes must "
                      "agree, got " + shape_str(p.cls_w.shape()) + " vs " +
                      shape_str(p.loc_w.shape()));
  }
}

HeadParams init_heads(Rng &rng, int c, int k) {
  if (c < 1 || k < 1) throw ConfigError("heads: dims must be >= 1");
  double bound = 1.0 / std::sqrt(static_cast<double>(c));
  HeadParams p;
  p.cls_w = init_matrix(rng, c, k, c);
  p.cls_b = Tensor({k});
  fill_uniform(rng, p.cls_b, bound);
  p.loc_w = init_matrix(rng, c, k, c);
  p.loc_b = Tensor({k});
  fill_uniform(rng, p.loc_b, bound);
  return p;
}

HeadVars lift(Tape &t, const HeadParams &p, bool trainable) {
  validate(p);
  HeadVars v;
  v.cls_w = trainable ? t.input(p.cls_w) : t.constant(p.cls_w);
  v.cls_b = trainable ? t.input(p.cls_b) : t.constant(p.cls_b);
  v.loc_w = trainable ? t.input(p.loc_w) : t.constant(p.loc_w);
  v.loc_b = trainable ? t.input(p.loc_b) : t.constant(p.loc_b);
  return v;
}

Var framewise_head(Tape &t, Var x, const HeadVars &p) {
  return t.sigmoid(t.col_bias(t.matmul(x, p.cls_w), p.cls_b));
}

Tensor framewise_head(const Tensor &x, const HeadParams &p) {
  Tape t;
  Var xv = t.constant(x);
  return t.value(framewise_head(t, xv, lift(t, p, false)));
}

Var localization_head(Tape &t, Var x, const HeadVars &p) {
  Var logits = t.col_bias(t.matmul(x, p.loc_w), p.loc_b);
  return t.exp(t.clamp(logits, -kLocLogitClip, kLocLogitClip));
}

Tensor localization_head(const Tensor &x, const HeadParams &p) {
  Tape t;
  Var xv = t.constant(x);
  return t.value(localization_head(t, xv, lift(t, p, false)));
}

}  // namespace wsed
