// tests/test_blocks.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "testutil.hpp"
#include "wsed/blocks.hpp"
#include "wsed/errors.hpp"
#include "wsed/ops.hpp"

using wsed::Tensor;
using wsed::Var;

TEST_CASE("glu gate semantics") {
  wsed::Rng rng(201);
  wsed::GluBlockParams p = wsed::init_glu(rng, 1, 1, 1, 1);
  Tensor x = wsedtest::random_tensor(rng, {1, 4, 4});

  SUBCASE("zero gate branch halves the linear branch") {
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v.data()[i] = 0.0;
    p.c(0) = 0.0;
    Tensor out = wsed::glu_forward(x, p);
    Tensor lin = wsed::conv2d(x, p.w, wsed::Padding::kSame);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.data()[i] ==
            doctest::Approx(0.5 * (lin.data()[i] + p.b(0))).epsilon(1e-12));
    }
  }

  SUBCASE("saturated gate passes the linear branch through") {
    p.c(0) = 1e4;
    Tensor out = wsed::glu_forward(x, p);
    Tensor lin = wsed::conv2d(x, p.w, wsed::Padding::kSame);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.data()[i] ==
            doctest::Approx(lin.data()[i] + p.b(0)).epsilon(1e-12));
    }
  }

  SUBCASE("1x1 kernels equal the elementwise hand computation") {
    Tensor out = wsed::glu_forward(x, p);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        double lin = p.w(0, 0, 0, 0) * x(0, r, c) + p.b(0);
        double gate =
            1.0 / (1.0 + std::exp(-(p.v(0, 0, 0, 0) * x(0, r, c) + p.c(0))));
        CHECK(out(0, r, c) == doctest::Approx(lin * gate).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("glu output magnitude never exceeds the linear branch") {
  wsed::Rng rng(202);
  for (int iter = 0; iter < 5; ++iter) {
    wsed::GluBlockParams p = wsed::init_glu(rng, 2, 3, 3, 3);
    Tensor x = wsedtest::random_tensor(rng, {2, 5, 6});
    Tensor out = wsed::glu_forward(x, p);
    Tensor lin = wsed::conv2d(x, p.w, wsed::Padding::kSame);
    for (int co = 0; co < 3; ++co) {
      for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 6; ++c) {
          CHECK(std::abs(out(co, r, c)) <=
                std::abs(lin(co, r, c) + p.b(co)) + 1e-15);
        }
      }
    }
  }
}

TEST_CASE("glu parameter validation") {
  wsed::Rng rng(203);
  wsed::GluBlockParams p = wsed::init_glu(rng, 1, 2, 3, 3);
  p.v = Tensor({2, 1, 1, 1});
  CHECK_THROWS_AS(wsed::validate(p), wsed::ConfigError);
  wsed::GluBlockParams q = wsed::init_glu(rng, 1, 2, 3, 3);
  q.b = Tensor({3});
  CHECK_THROWS_AS(wsed::validate(q), wsed::ConfigError);
  // Channel mismatch with the input surfaces as a dimension error.
  wsed::GluBlockParams ok = wsed::init_glu(rng, 2, 2, 3, 3);
  CHECK_THROWS_AS(wsed::glu_forward(Tensor({1, 4, 4}), ok),
                  wsed::DimensionError);
}

TEST_CASE("inception presets respect the budget and spatial size") {
  wsed::InceptionAttentionConfig v1 = wsed::inception_v1();
  CHECK(v1.branches.size() == 4);
  CHECK(v1.branches[0].filters == 16);
  CHECK(v1.branches[1].filters == 32);
  CHECK(v1.branches[2].filters == 8);
  CHECK(v1.branches[3].filters == 8);
  CHECK(v1.branches[3].pre_op == wsed::InceptionPreOp::kAvgPool2x2S1);

  wsed::InceptionAttentionConfig v2 = wsed::inception_v2();
  CHECK(v2.branches.size() == 5);
  CHECK(v2.branches[1].filters == 24);
  CHECK(v2.branches[3].kernel_h == 15);

  wsed::InceptionAttentionConfig v3 = wsed::inception_v3();
  CHECK(v3.branches.size() == 6);
  CHECK(v3.branches[1].filters == 16);
  CHECK(v3.branches[4].kernel_h == 25);

  wsed::Rng rng(204);
  for (const wsed::InceptionAttentionConfig &cfg : {v1, v2, v3}) {
    int total = 0;
    for (const auto &b : cfg.branches) total += b.filters;
    CHECK(total == 64);

    wsed::InceptionAttentionParams p = wsed::init_inception(rng, 3, cfg);
    Tensor x = wsedtest::random_tensor(rng, {3, 6, 5});
    Tensor out = wsed::inception_attention_forward(x, cfg, p);
    CHECK(out.shape() == std::vector<int>{64, 6, 5});
  }

  // Scaled-down presets used by the toy models keep the proportions.
  wsed::InceptionAttentionConfig small = wsed::inception_v1(16);
  CHECK(small.branches[0].filters == 4);
  CHECK(small.branches[1].filters == 8);
  CHECK(small.branches[2].filters == 2);
  CHECK(small.branches[3].filters == 2);
}

TEST_CASE("inception budget violations are configuration errors") {
  wsed::InceptionAttentionConfig cfg = wsed::inception_v1();
  cfg.branches[0].filters += 1;
  CHECK_THROWS_AS(wsed::validate(cfg), wsed::ConfigError);
  wsed::Rng rng(205);
  CHECK_THROWS_AS(wsed::init_inception(rng, 3, cfg), wsed::ConfigError);
  cfg.branches[0].filters -= 1;
  cfg.budget = 63;
  CHECK_THROWS_AS(wsed::validate(cfg), wsed::ConfigError);
}

TEST_CASE("degenerate single-branch inception equals glu_forward") {
  wsed::InceptionAttentionConfig cfg;
  cfg.budget = 64;
  wsed::InceptionBranchSpec b;
  b.kernel_h = 3;
  b.kernel_w = 3;
  b.filters = 64;
  cfg.branches.push_back(b);

  wsed::Rng rng(206);
  wsed::InceptionAttentionParams p = wsed::init_inception(rng, 2, cfg);
  Tensor x = wsedtest::random_tensor(rng, {2, 4, 4});
  Tensor got = wsed::inception_attention_forward(x, cfg, p);
  Tensor want = wsed::glu_forward(x, p.branches[0].glu);
  CHECK(wsedtest::bit_equal(got.vals(), want.vals()));
}

TEST_CASE("two-branch concatenation stacks independent branch outputs") {
  wsed::InceptionAttentionConfig cfg;
  cfg.budget = 64;
  for (int kernel : {1, 3}) {
    wsed::InceptionBranchSpec b;
    b.kernel_h = kernel;
    b.kernel_w = kernel;
    b.filters = 32;
    cfg.branches.push_back(b);
  }
  wsed::Rng rng(207);
  wsed::InceptionAttentionParams p = wsed::init_inception(rng, 2, cfg);
  Tensor x = wsedtest::random_tensor(rng, {2, 5, 4});
  Tensor got = wsed::inception_attention_forward(x, cfg, p);
  Tensor b0 = wsed::glu_forward(x, p.branches[0].glu);
  Tensor b1 = wsed::glu_forward(x, p.branches[1].glu);
  for (std::size_t i = 0; i < b0.size(); ++i) {
    CHECK(got.data()[i] == b0.data()[i]);
    CHECK(got.data()[b0.size() + i] == b1.data()[i]);
  }
}

TEST_CASE("custom 1x1conv pre-op branch runs and differentiates") {
  wsed::InceptionAttentionConfig cfg;
  cfg.budget = 4;
  wsed::InceptionBranchSpec b;
  b.kernel_h = 3;
  b.kernel_w = 3;
  b.filters = 4;
  b.pre_op = wsed::InceptionPreOp::kConv1x1;
  cfg.branches.push_back(b);
  wsed::Rng rng(208);
  wsed::InceptionAttentionParams p = wsed::init_inception(rng, 6, cfg);
  CHECK(p.branches[0].pre_w.shape() == std::vector<int>{4, 6, 1, 1});
  Tensor x = wsedtest::random_tensor(rng, {6, 4, 4});
  Tensor out = wsed::inception_attention_forward(x, cfg, p);
  CHECK(out.shape() == std::vector<int>{4, 4, 4});
}

namespace {

// Direct evaluation of the attention formulas with no shared code: Q, K, V
// by explicit loops, then row-softmaxed scores times V.
Tensor oracle_transformer(const Tensor &x, const wsed::TransformerLayerParams &p) {
  int t = x.dim(0), c = x.dim(1);
  int dk = p.wq.dim(1), dv = p.wv.dim(1);
  auto project = [&](const Tensor &w, int d) {
    Tensor out({t, d});
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int m = 0; m < c; ++m) acc += x(i, m) * w(m, j);
        out(i, j) = acc;
      }
    return out;
  };
  Tensor q = project(p.wq, dk), k = project(p.wk, dk), v = project(p.wv, dv);
  Tensor h({t, dv});
  for (int i = 0; i < t; ++i) {
    std::vector<double> row(static_cast<std::size_t>(t));
    double mx = -1e300;
    for (int j = 0; j < t; ++j) {
      double acc = 0.0;
      for (int m = 0; m < dk; ++m) acc += q(i, m) * k(j, m);
      row[static_cast<std::size_t>(j)] = acc / std::sqrt(double(dk));
      mx = std::max(mx, row[static_cast<std::size_t>(j)]);
    }
    double denom = 0.0;
    for (int j = 0; j < t; ++j) {
      row[static_cast<std::size_t>(j)] =
          std::exp(row[static_cast<std::size_t>(j)] - mx);
      denom += row[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < t; ++j) {
      double a = row[static_cast<std::size_t>(j)] / denom;
      for (int m = 0; m < dv; ++m) h(i, m) += a * v(j, m);
    }
  }
  return h;
}

}  // namespace

TEST_CASE("transformer encoder matches the direct formula oracle") {
  wsed::Rng rng(209);
  for (int iter = 0; iter < 10; ++iter) {
    wsed::TransformerLayerParams p = wsed::init_transformer(rng, 3, 2, 2);
    Tensor x = wsedtest::random_tensor(rng, {4, 3});
    Tensor got = wsed::transformer_encoder_forward(x, p);
    Tensor want = oracle_transformer(x, p);
    CHECK(got.shape() == std::vector<int>{4, 2});
    CHECK(wsedtest::max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("transformer trivia: singleton time axis and duplicated rows") {
  wsed::Rng rng(210);
  wsed::TransformerLayerParams p = wsed::init_transformer(rng, 3, 2, 2);

  // T = 1: the attention matrix is [[1]]; output equals the value row.
  Tensor x1 = wsedtest::random_tensor(rng, {1, 3});
  Tensor h1 = wsed::transformer_encoder_forward(x1, p);
  Tensor v1 = wsed::matmul(x1, p.wv);
  CHECK(wsedtest::max_abs_diff(h1, v1) < 1e-12);

  // Two identical input rows produce two identical output rows.
  Tensor row = wsedtest::random_tensor(rng, {1, 3});
  Tensor x2({2, 3});
  for (int j = 0; j < 3; ++j) {
    x2(0, j) = row(0, j);
    x2(1, j) = row(0, j);
  }
  Tensor h2 = wsed::transformer_encoder_forward(x2, p);
  for (int j = 0; j < 2; ++j) CHECK(h2(0, j) == doctest::Approx(h2(1, j)));

  // Scaling the input changes attention but keeps the output finite.
  Tensor big = wsed::scale(x2, 1000.0);
  Tensor hb = wsed::transformer_encoder_forward(big, p);
  CHECK(hb.all_finite());

  CHECK_THROWS_AS(wsed::transformer_encoder_forward(Tensor({2, 4}), p),
                  wsed::DimensionError);
}

TEST_CASE("transformer attention rows sum to one") {
  // Recomputed through the public pieces: softmax over scaled scores.
  wsed::Rng rng(211);
  wsed::TransformerLayerParams p = wsed::init_transformer(rng, 5, 3, 4);
  Tensor x = wsedtest::random_tensor(rng, {6, 5}, -3.0, 3.0);
  Tensor q = wsed::matmul(x, p.wq);
  Tensor k = wsed::matmul(x, p.wk);
  Tensor scores = wsed::scale(wsed::matmul_nt(q, k), 1.0 / std::sqrt(3.0));
  Tensor attn = wsed::softmax(scores, 1);
  for (int i = 0; i < 6; ++i) {
    double s = 0.0;
    for (int j = 0; j < 6; ++j) s += attn(i, j);
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("transformer residual_norm variant") {
  wsed::Rng rng(212);
  wsed::TransformerLayerParams p = wsed::init_transformer(rng, 4, 3, 4);
  p.residual_norm = true;
  Tensor x = wsedtest::random_tensor(rng, {5, 4});
  Tensor h = wsed::transformer_encoder_forward(x, p);
  CHECK(h.shape() == std::vector<int>{5, 4});
  // Each output row is standardized: mean 0, variance 1 (up to the eps).
  for (int i = 0; i < 5; ++i) {
    double mean = 0.0, var = 0.0;
    for (int j = 0; j < 4; ++j) mean += h(i, j);
    mean /= 4.0;
    for (int j = 0; j < 4; ++j) var += (h(i, j) - mean) * (h(i, j) - mean);
    var /= 4.0;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }

  // d_v != C cannot support the residual.
  wsed::TransformerLayerParams bad = wsed::init_transformer(rng, 4, 3, 2);
  bad.residual_norm = true;
  CHECK_THROWS_AS(wsed::validate(bad), wsed::ConfigError);
}

TEST_CASE("framewise head frozen and hand values") {
  wsed::HeadParams zero;
  zero.cls_w = Tensor({3, 2});
  zero.cls_b = Tensor({2});
  zero.loc_w = Tensor({3, 2});
  zero.loc_b = Tensor({2});
  Tensor x({4, 3});
  Tensor probs = wsed::framewise_head(x, zero);
  CHECK(probs.shape() == std::vector<int>{4, 2});
  for (std::size_t i = 0; i < probs.size(); ++i) {
    CHECK(probs.data()[i] == doctest::Approx(0.5));
  }

  // Single-frame logistic regression against a hand computation.
  wsed::Rng rng(213);
  wsed::HeadParams p = wsed::init_heads(rng, 3, 2);
  Tensor f1 = wsedtest::random_tensor(rng, {1, 3});
  Tensor out = wsed::framewise_head(f1, p);
  for (int k = 0; k < 2; ++k) {
    double logit = p.cls_b(k);
    for (int c = 0; c < 3; ++c) logit += f1(0, c) * p.cls_w(c, k);
    CHECK(out(0, k) == doctest::Approx(1.0 / (1.0 + std::exp(-logit))));
    CHECK(out(0, k) > 0.0);
    CHECK(out(0, k) < 1.0);
  }

  CHECK_THROWS_AS(wsed::framewise_head(Tensor({4, 5}), p),
                  wsed::DimensionError);
}

TEST_CASE("localization head positivity and dominance") {
  wsed::Rng rng(214);
  wsed::HeadParams p = wsed::init_heads(rng, 3, 2);

  Tensor f = wsedtest::random_tensor(rng, {6, 3}, -50.0, 50.0);
  Tensor z = wsed::localization_head(f, p);
  CHECK(z.all_finite());
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(z.data()[i] > 0.0);

  // Constant features over time give uniform normalized weights.
  Tensor fc({4, 3});
  for (int t = 0; t < 4; ++t)
    for (int c = 0; c < 3; ++c) fc(t, c) = 0.37;
  Tensor zc = wsed::localization_head(fc, p);
  for (int k = 0; k < 2; ++k) {
    double total = 0.0;
    for (int t = 0; t < 4; ++t) total += zc(t, k);
    for (int t = 0; t < 4; ++t) {
      CHECK(zc(t, k) / total == doctest::Approx(0.25));
    }
  }

  // A dominant frame takes a normalized weight above one half.
  wsed::HeadParams q;
  q.cls_w = Tensor({1, 1});
  q.cls_b = Tensor({1});
  q.loc_w = Tensor({1, 1}, {1.0});
  q.loc_b = Tensor({1});
  Tensor two({2, 1}, {3.0, 0.0});
  Tensor zw = wsed::localization_head(two, q);
  CHECK(zw(0, 0) / (zw(0, 0) + zw(1, 0)) > 0.5);

  // Extreme logits stay finite thanks to the clamp.
  Tensor huge({1, 3}, {1e6, 1e6, 1e6});
  Tensor zh = wsed::localization_head(huge, p);
  CHECK(zh.all_finite());
}

TEST_CASE("all blocks pass grad_check on small random instances") {
  wsed::Rng rng(215);
  const double kDelta = 1e-4;

  for (int iter = 0; iter < 3; ++iter) {
    // GLU.
    wsed::GluBlockParams gp = wsed::init_glu(rng, 2, 2, 3, 3);
    Tensor gx = wsedtest::random_tensor(rng, {2, 4, 4});
    double ge = wsed::grad_check(
        [](wsed::Tape &t, const std::vector<Var> &v) {
          wsed::GluVars gv{v[1], v[2], v[3], v[4]};
          return wsed::glu_forward(t, v[0], gv);
        },
        {gx, gp.w, gp.b, gp.v, gp.c}, kDelta);
    CHECK(ge < 1e-4);

    // Inception v1 at a tiny budget (branches 2/4/1/1).
    wsed::InceptionAttentionConfig cfg = wsed::inception_v1(8);
    wsed::InceptionAttentionParams ip = wsed::init_inception(rng, 2, cfg);
    Tensor ix = wsedtest::random_tensor(rng, {2, 4, 4});
    std::vector<Tensor> inputs = {ix};
    for (const auto &bp : ip.branches) {
      inputs.push_back(bp.glu.w);
      inputs.push_back(bp.glu.b);
      inputs.push_back(bp.glu.v);
      inputs.push_back(bp.glu.c);
    }
    double ie = wsed::grad_check(
        [&cfg](wsed::Tape &t, const std::vector<Var> &v) {
          wsed::InceptionVars iv;
          const std::size_t nb = (v.size() - 1) / 4;
          for (std::size_t bi = 0; bi < nb; ++bi) {
            wsed::InceptionBranchVars bv;
            bv.glu = wsed::GluVars{v[1 + 4 * bi], v[2 + 4 * bi],
                                   v[3 + 4 * bi], v[4 + 4 * bi]};
            iv.branches.push_back(bv);
          }
          return wsed::inception_attention_forward(t, v[0], cfg, iv);
        },
        inputs, kDelta);
    CHECK(ie < 1e-4);

    // Transformer, both variants.
    wsed::TransformerLayerParams tp = wsed::init_transformer(rng, 3, 2, 3);
    Tensor tx = wsedtest::random_tensor(rng, {4, 3});
    for (bool res : {false, true}) {
      double te = wsed::grad_check(
          [res](wsed::Tape &t, const std::vector<Var> &v) {
            wsed::TransformerVars tv{v[1], v[2], v[3], res};
            return wsed::transformer_encoder_forward(t, v[0], tv);
          },
          {tx, tp.wq, tp.wk, tp.wv}, kDelta);
      CHECK(te < 1e-4);
    }

    // Heads.
    wsed::HeadParams hp = wsed::init_heads(rng, 3, 2);
    Tensor hx = wsedtest::random_tensor(rng, {4, 3});
    double he = wsed::grad_check(
        [](wsed::Tape &t, const std::vector<Var> &v) {
          wsed::HeadVars hv{v[1], v[2], v[3], v[4]};
          return wsed::framewise_head(t, v[0], hv);
        },
        {hx, hp.cls_w, hp.cls_b, hp.loc_w, hp.loc_b}, kDelta);
    CHECK(he < 1e-4);
    double le = wsed::grad_check(
        [](wsed::Tape &t, const std::vector<Var> &v) {
          wsed::HeadVars hv{v[1], v[2], v[3], v[4]};
          return wsed::localization_head(t, v[0], hv);
        },
        {hx, hp.cls_w, hp.cls_b, hp.loc_w, hp.loc_b}, kDelta);
    CHECK(le < 1e-4);
  }
}
