// tests/test_tensor_ops.cpp

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

#include "testutil.hpp"
#include "wsed/errors.hpp"
#include "wsed/kernels.hpp"
#include "wsed/ops.hpp"
#include "wsed/tensor.hpp"

using wsed::Tensor;
namespace kern = wsed::kern;

TEST_CASE("tensor construction and validation") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.data()[i] == 0.0);

  CHECK_THROWS_AS(Tensor({0, 3}), wsed::DimensionError);
  CHECK_THROWS_AS(Tensor({-1}), wsed::DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), wsed::DimensionError);
  CHECK_THROWS_AS(Tensor(std::vector<int>{}), wsed::DimensionError);

  Tensor m = Tensor::matrix({{1, 2}, {3, 4}});
  CHECK(m(1, 0) == 3.0);
  CHECK(wsed::shape_str(m.shape()) == "[2x2]");

  Tensor bad({1}, {std::nan("")});
  CHECK_FALSE(bad.all_finite());
  CHECK_THROWS_AS(wsed::check_finite(bad, "test"), wsed::NumericError);
}

TEST_CASE("matmul matches hand values and the brute-force oracle") {
  Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  Tensor b = Tensor::matrix({{5, 6}, {7, 8}});
  Tensor c = wsed::matmul(a, b);
  CHECK(c(0, 0) == doctest::Approx(19.0));
  CHECK(c(0, 1) == doctest::Approx(22.0));
  CHECK(c(1, 0) == doctest::Approx(43.0));
  CHECK(c(1, 1) == doctest::Approx(50.0));

  wsed::Rng rng(11);
  for (int iter = 0; iter < 30; ++iter) {
    int m = static_cast<int>(rng.uniform_int(1, 9));
    int p = static_cast<int>(rng.uniform_int(1, 9));
    int n = static_cast<int>(rng.uniform_int(1, 9));
    Tensor x = wsedtest::random_tensor(rng, {m, p});
    Tensor y = wsedtest::random_tensor(rng, {p, n});
    Tensor got = wsed::matmul(x, y);
    Tensor want = wsedtest::oracle_matmul(x, y);
    CHECK(wsedtest::max_abs_diff(got, want) < 1e-10);

    // A * B^T and A^T * B against the same oracle via explicit transposes.
    Tensor yt({n, p});
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < n; ++j) yt(j, i) = y(i, j);
    Tensor got_nt = wsed::matmul_nt(x, yt);
    CHECK(wsedtest::max_abs_diff(got_nt, want) < 1e-10);

    Tensor xt({p, m});
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < p; ++j) xt(j, i) = x(i, j);
    Tensor got_tn = wsed::matmul_tn(xt, y);
    CHECK(wsedtest::max_abs_diff(got_tn, want) < 1e-10);
  }

  CHECK_THROWS_AS(wsed::matmul(a, Tensor({3, 2})), wsed::DimensionError);
  try {
    wsed::matmul(a, Tensor({3, 2}));
  } catch (const wsed::DimensionError &e) {
    std::string msg = e.what();
    CHECK(msg.find("[2x2]") != std::string::npos);
    CHECK(msg.find("[3x2]") != std::string::npos);
  }
}

TEST_CASE("conv2d matches the nested-loop oracle in both padding modes") {
  wsed::Rng rng(23);
  for (int iter = 0; iter < 25; ++iter) {
    int cin = static_cast<int>(rng.uniform_int(1, 3));
    int cout = static_cast<int>(rng.uniform_int(1, 3));
    int t = static_cast<int>(rng.uniform_int(3, 10));
    int f = static_cast<int>(rng.uniform_int(3, 10));
    int kh = static_cast<int>(rng.uniform_int(1, 4));
    int kw = static_cast<int>(rng.uniform_int(1, 4));
    Tensor x = wsedtest::random_tensor(rng, {cin, t, f});
    Tensor k = wsedtest::random_tensor(rng, {cout, cin, kh, kw});

    Tensor same = wsed::conv2d(x, k, wsed::Padding::kSame);
    CHECK(same.shape() == std::vector<int>{cout, t, f});
    CHECK(wsedtest::max_abs_diff(same, wsedtest::oracle_conv2d(x, k, true)) <
          1e-10);

    if (kh <= t && kw <= f) {
      Tensor valid = wsed::conv2d(x, k, wsed::Padding::kValid);
      CHECK(valid.shape() == std::vector<int>{cout, t - kh + 1, f - kw + 1});
      CHECK(wsedtest::max_abs_diff(valid,
                                   wsedtest::oracle_conv2d(x, k, false)) <
            1e-10);
    }
  }
}

TEST_CASE("conv2d identity kernel and validation errors") {
  // 1x1 kernel with weight 1 reproduces the input exactly.
  wsed::Rng rng(3);
  Tensor x = wsedtest::random_tensor(rng, {1, 4, 5});
  Tensor k({1, 1, 1, 1}, {1.0});
  Tensor y = wsed::conv2d(x, k, wsed::Padding::kSame);
  CHECK(wsedtest::bit_equal(x.vals(), y.vals()));

  // Valid padding with an oversized kernel is an error.
  Tensor big({1, 1, 6, 1});
  CHECK_THROWS_AS(wsed::conv2d(x, big, wsed::Padding::kValid),
                  wsed::DimensionError);
  // Channel mismatch.
  Tensor k2({1, 2, 1, 1});
  CHECK_THROWS_AS(wsed::conv2d(x, k2, wsed::Padding::kSame),
                  wsed::DimensionError);
}

TEST_CASE("even kernels pad with the extra cell trailing") {
  // Input 1x1x2, kernel 1x1x1x2 [a, b], same padding: pad_l = 0, one
  // trailing zero column.  out[0] = a*x0 + b*x1, out[1] = a*x1 + b*0.
  Tensor x({1, 1, 2}, {3.0, 5.0});
  Tensor k({1, 1, 1, 2}, {2.0, 7.0});
  Tensor y = wsed::conv2d(x, k, wsed::Padding::kSame);
  CHECK(y(0, 0, 0) == doctest::Approx(2.0 * 3.0 + 7.0 * 5.0));
  CHECK(y(0, 0, 1) == doctest::Approx(2.0 * 5.0));
}

TEST_CASE("sigmoid, relu, exp, clamp") {
  Tensor x = Tensor::vec({0.0, 2.0, -2.0, 500.0, -500.0});
  Tensor s = wsed::sigmoid(x);
  CHECK(s(0) == doctest::Approx(0.5));
  CHECK(s(1) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
  CHECK(s(2) == doctest::Approx(std::exp(-2.0) / (1.0 + std::exp(-2.0))));
  CHECK(s.all_finite());
  CHECK(s(3) <= 1.0);
  CHECK(s(4) >= 0.0);
  CHECK(s(4) < 1e-100);

  Tensor r = wsed::relu(Tensor::vec({-1.0, 0.0, 2.5}));
  CHECK(r(0) == 0.0);
  CHECK(r(1) == 0.0);
  CHECK(r(2) == 2.5);

  Tensor e = wsed::exp(Tensor::vec({0.0, 1.0}));
  CHECK(e(0) == 1.0);
  CHECK(e(1) == doctest::Approx(std::exp(1.0)));

  Tensor c = wsed::clamp(Tensor::vec({-2.0, 0.5, 3.0}), 0.0, 1.0);
  CHECK(c(0) == 0.0);
  CHECK(c(1) == 0.5);
  CHECK(c(2) == 1.0);
  CHECK_THROWS_AS(wsed::clamp(x, 1.0, 0.0), wsed::ArgumentError);
}

TEST_CASE("softmax frozen values and invariants") {
  Tensor p = wsed::softmax(Tensor::vec({1.0, 2.0, 3.0}), 0);
  CHECK(p(0) == doctest::Approx(0.09003057).epsilon(1e-5));
  CHECK(p(1) == doctest::Approx(0.24472847).epsilon(1e-5));
  CHECK(p(2) == doctest::Approx(0.66524096).epsilon(1e-5));

  Tensor u = wsed::softmax(Tensor::vec({0.0, 0.0, 0.0}), 0);
  for (int i = 0; i < 3; ++i) CHECK(u(i) == doctest::Approx(1.0 / 3.0));

  // Shift invariance and row/column normalization on random matrices.
  wsed::Rng rng(31);
  for (int iter = 0; iter < 10; ++iter) {
    Tensor m = wsedtest::random_tensor(rng, {4, 5}, -30.0, 30.0);
    for (int axis : {0, 1}) {
      Tensor sm = wsed::softmax(m, axis);
      int slices = axis == 0 ? 5 : 4;
      int len = axis == 0 ? 4 : 5;
      for (int sidx = 0; sidx < slices; ++sidx) {
        double total = 0.0;
        for (int i = 0; i < len; ++i) {
          double v = axis == 0 ? sm(i, sidx) : sm(sidx, i);
          CHECK(v > 0.0);
          CHECK(v < 1.0 + 1e-12);
          total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      }
      // Adding a constant to every logit leaves the result unchanged.
      Tensor shifted = m;
      for (std::size_t i = 0; i < shifted.size(); ++i)
        shifted.data()[i] += 123.0;
      Tensor sm2 = wsed::softmax(shifted, axis);
      CHECK(wsedtest::max_abs_diff(sm, sm2) < 1e-12);
    }
  }

  CHECK_THROWS_AS(wsed::softmax(Tensor({2, 2, 2}), 0), wsed::DimensionError);
  CHECK_THROWS_AS(wsed::softmax(Tensor({2, 2}), 2), wsed::ArgumentError);
}

TEST_CASE("avg_pool2d truncates trailing remainder cells") {
  // One channel, 1 x 5 input pooled with a 1 x 2 window: two windows, the
  // fifth column is dropped.
  Tensor x({1, 1, 5}, {1.0, 3.0, 5.0, 7.0, 100.0});
  Tensor y = wsed::avg_pool2d(x, 1, 2);
  CHECK(y.shape() == std::vector<int>{1, 1, 2});
  CHECK(y(0, 0, 0) == doctest::Approx(2.0));
  CHECK(y(0, 0, 1) == doctest::Approx(6.0));

  Tensor x2({1, 4, 4});
  for (std::size_t i = 0; i < x2.size(); ++i) x2.data()[i] = double(i);
  Tensor y2 = wsed::avg_pool2d(x2, 2, 2);
  CHECK(y2.shape() == std::vector<int>{1, 2, 2});
  CHECK(y2(0, 0, 0) == doctest::Approx((0.0 + 1.0 + 4.0 + 5.0) / 4.0));

  CHECK_THROWS_AS(wsed::avg_pool2d(x, 2, 6), wsed::DimensionError);
  CHECK_THROWS_AS(wsed::avg_pool2d(x, 0, 1), wsed::ArgumentError);
}

TEST_CASE("ops are deterministic and backend-equivalent") {
  wsed::Rng rng(41);
  Tensor a = wsedtest::random_tensor(rng, {7, 13});
  Tensor b = wsedtest::random_tensor(rng, {13, 9});
  Tensor x = wsedtest::random_tensor(rng, {2, 9, 11});
  Tensor k = wsedtest::random_tensor(rng, {3, 2, 3, 3});

  Tensor c1 = wsed::matmul(a, b);
  Tensor c2 = wsed::matmul(a, b);
  CHECK(wsedtest::bit_equal(c1.vals(), c2.vals()));

  kern::Backend initial = kern::active_backend();
  kern::set_backend(kern::Backend::kScalar);
  Tensor mm_s = wsed::matmul(a, b);
  Tensor cv_s = wsed::conv2d(x, k, wsed::Padding::kSame);
  kern::set_backend(initial);
  Tensor mm_d = wsed::matmul(a, b);
  Tensor cv_d = wsed::conv2d(x, k, wsed::Padding::kSame);
  // matmul and conv2d accumulate through axpy only, so they are bit-exact
  // across kernel backends.
  CHECK(wsedtest::bit_equal(mm_s.vals(), mm_d.vals()));
  CHECK(wsedtest::bit_equal(cv_s.vals(), cv_d.vals()));
}
