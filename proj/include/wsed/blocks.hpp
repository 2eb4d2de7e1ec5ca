// wsed/blocks.hpp

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

#ifndef WSED_BLOCKS_HPP_
#define WSED_BLOCKS_HPP_

#include <string>
#include <vector>

#include "wsed/rng.hpp"
#include "wsed/tape.hpp"
#include "wsed/tensor.hpp"

namespace wsed {

// ---------------------------------------------------------------------------
// GLU gated convolution: (W*x + b) ⊙ sigmoid(V*x + c), same padding.

struct GluBlockParams {
  Tensor w;  // [C_out x C_in x kh x kw], linear branch
  Tensor b;  // [C_out]
  Tensor v;  // same shape as w, gate branch
  Tensor c;  // [C_out]
};

// Throws ConfigError when the four tensors are inconsistent.
void validate(const GluBlockParams &p);

// Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] initialization,
// fan_in = C_in * kh * kw.
GluBlockParams init_glu(Rng &rng, int cin, int cout, int kh, int kw);

struct GluVars {
  Var w, b, v, c;
};
GluVars lift(Tape &t, const GluBlockParams &p, bool trainable);

Var glu_forward(Tape &t, Var x, const GluVars &p);
Tensor glu_forward(const Tensor &x, const GluBlockParams &p);

// ---------------------------------------------------------------------------
// Inception-attention block: parallel gated-conv branches concatenated on
// the channel axis under a shared filter budget.

enum class InceptionPreOp { kNone, kConv1x1, kAvgPool2x2S1 };

struct InceptionBranchSpec {
  int kernel_h = 1;
  int kernel_w = 1;
  int filters = 1;
  InceptionPreOp pre_op = InceptionPreOp::kNone;
};

struct InceptionAttentionConfig {
  std::vector<InceptionBranchSpec> branches;
  int budget = 64;
  std::string variant = "custom";  // v1 | v2 | v3 | custom
};

// Throws ConfigError unless branch filters sum exactly to the budget.
void validate(const InceptionAttentionConfig &cfg);

// Preset branch splits.  At budget 64: v1 = {1x1:16, 3x3:32, 5x5:8,
// pool+1x1:8}; v2 trades 8 filters of the 3x3 branch for a 15x15 branch;
// v3 additionally trades 8 more for a 25x25 branch.  Other budgets scale
// the same fractions with largest-remainder rounding.
InceptionAttentionConfig inception_v1(int budget = 64);
InceptionAttentionConfig inception_v2(int budget = 64);
InceptionAttentionConfig inception_v3(int budget = 64);

// One gated convolution per branch.  A branch whose pre_op is kConv1x1
// additionally carries a plain 1x1 reduction convolution (pre_w, pre_b)
// whose output width equals the branch filter count; the other pre-ops are
// parameter-free and leave pre_w/pre_b empty.
struct InceptionBranchParams {
  Tensor pre_w;  // [filters x C_in x 1 x 1] for kConv1x1, else empty
  Tensor pre_b;  // [filters] for kConv1x1, else empty
  GluBlockParams glu;
};

struct InceptionAttentionParams {
  std::vector<InceptionBranchParams> branches;
};

InceptionAttentionParams init_inception(Rng &rng, int cin,
                                        const InceptionAttentionConfig &cfg);

struct InceptionBranchVars {
  bool has_pre = false;
  Var pre_w, pre_b;
  GluVars glu;
};
struct InceptionVars {
  std::vector<InceptionBranchVars> branches;
};
InceptionVars lift(Tape &t, const InceptionAttentionParams &p, bool trainable);

Var inception_attention_forward(Tape &t, Var x,
                                const InceptionAttentionConfig &cfg,
                                const InceptionVars &p);
Tensor inception_attention_forward(const Tensor &x,
                                   const InceptionAttentionConfig &cfg,
                                   const InceptionAttentionParams &p);

// ---------------------------------------------------------------------------
// Single-head transformer encoder layer (no positional encoding):
// h = softmax(Q K^T / sqrt(d_k)) V with Q = xW^Q, K = xW^K, V = xW^V.

struct TransformerLayerParams {
  Tensor wq;  // [C x d_k]
  Tensor wk;  // [C x d_k]
  Tensor wv;  // [C x d_v]
  // Optional residual connection plus per-row layer normalization around
  // the attention output (requires d_v == C).  Off by default.
  bool residual_norm = false;
};

void validate(const TransformerLayerParams &p);

TransformerLayerParams init_transformer(Rng &rng, int c, int d_k, int d_v);

struct TransformerVars {
  Var wq, wk, wv;
  bool residual_norm = false;
};
TransformerVars lift(Tape &t, const TransformerLayerParams &p, bool trainable);

Var transformer_encoder_forward(Tape &t, Var x, const TransformerVars &p);
Tensor transformer_encoder_forward(const Tensor &x,
                                   const TransformerLayerParams &p);

// ---------------------------------------------------------------------------
// Heads over per-frame embeddings [T x C]: a sigmoid classification head
// and a positive localization (attention) head exp(features·W + b), with
// logits clamped to [-30, 30] so downstream tensors stay finite.

struct HeadParams {
  Tensor cls_w;  // [C x K]
  Tensor cls_b;  // [K]
  Tensor loc_w;  // [C x K]
  Tensor loc_b;  // [K]
};

void validate(const HeadParams &p);

HeadParams init_heads(Rng &rng, int c, int k);

struct HeadVars {
  Var cls_w, cls_b, loc_w, loc_b;
};
HeadVars lift(Tape &t, const HeadParams &p, bool trainable);

// Frame probabilities sigmoid(x·W + b), shape [T x K], values in (0, 1).
Var framewise_head(Tape &t, Var x, const HeadVars &p);
Tensor framewise_head(const Tensor &x, const HeadParams &p);

// Positive per-class frame weights exp(clamp(x·W + b)), shape [T x K].
Var localization_head(Tape &t, Var x, const HeadVars &p);
Tensor localization_head(const Tensor &x, const HeadParams &p);

}  // namespace wsed

#endif  // WSED_BLOCKS_HPP_
