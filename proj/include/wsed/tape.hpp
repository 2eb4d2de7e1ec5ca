// wsed/tape.hpp

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

#ifndef WSED_TAPE_HPP_
#define WSED_TAPE_HPP_

#include <functional>
#include <vector>

#include "wsed/ops.hpp"
#include "wsed/tensor.hpp"

namespace wsed {

// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode automatic differentiation over a linear tape of operations.
// Every op records its forward value and a closure that scatters the output
// gradient to its parents; backward() walks the tape once in reverse
// creation order.  A Tape is single-use per backward pass and not
// thread-safe.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  // Leaf that participates in differentiation.
  Var input(Tensor v);

  // Leaf treated as a constant (zero gradient, never visited backward).
  Var constant(Tensor v);

  const Tensor &value(Var v) const;

  // Gradient of the last backward() loss w.r.t. this node.  Only inputs and
  // intermediates reachable from the loss carry meaningful gradients; nodes
  // never touched hold zeros.
  const Tensor &grad(Var v) const;

  // Accumulates gradients of a scalar loss into every differentiable node.
  // Throws DimensionError when loss is not a single-element tensor and
  // NumericError when a non-finite gradient appears.
  void backward(Var loss);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  // --- elementwise ---
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var scale(Var a, double c);
  // m * x + c with scalar constants.
  Var affine(Var a, double m, double c);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var exp(Var a);
  Var clamp(Var a, double lo, double hi);

  // --- linear algebra ---
  Var matmul(Var a, Var b);
  // a * b^T with b stored row-major [N x P].
  Var matmul_nt(Var a, Var b);
  Var transpose(Var a);

  // --- convolution stack ---
  Var conv2d(Var x, Var k, Padding padding);
  // x: [C x T x F], b: [C]; adds b[c] to every cell of channel c.
  Var channel_bias(Var x, Var b);
  // x: [T x K], b: [K]; adds b[k] to column k of every row.
  Var col_bias(Var x, Var b);
  Var avg_pool2d(Var x, int wh, int ww);
  // Stride-1 2x2 mean pooling over [C x T x F] that preserves spatial size;
  // windows are clipped at the lower/right boundary and average only the
  // cells they cover.
  Var avg_pool_2x2_s1(Var x);
  Var concat_channels(const std::vector<Var> &parts);
  // [C x T x F] -> [T x C], mean over the frequency axis.
  Var freq_mean(Var x);

  // --- softmax / reductions ---
  Var softmax_rows(Var a);
  Var softmax_cols(Var a);
  // [T x K] -> [K], sum over rows.
  Var colsum(Var a);
  // [T x K] -> [K], max over rows; gradient routes to the first maximum.
  Var colmax(Var a);
  // x: [T x K], s: [K]; out[t][k] = x[t][k] / s[k].
  Var div_cols(Var x, Var s);
  // [T x K] -> [S x K]: mean over windows of `win` consecutive rows,
  // S = ceil(T / win); the trailing window may be shorter.
  Var window_mean(Var x, int win);
  // Sum of all elements -> scalar.
  Var sum(Var a);
  Var add_n(const std::vector<Var> &parts);
  Var reshape(Var a, std::vector<int> shape);

  // --- losses / normalization ---
  // Summed binary cross-entropy with predictions clamped to
  // [eps, 1 - eps]; target must be a constant node.
  Var bce(Var pred, Var target, double eps = 1e-7);
  // Per-row standardization (x - mean) / sqrt(var + 1e-5), no learned
  // gain or shift.
  Var layer_norm_rows(Var a);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void()> backprop;
  };

  Var emit(Tensor value, bool requires_grad, std::function<void()> backprop);
  Node &node(Var v);
  const Node &node(Var v) const;
  Tensor &g(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  const Tensor &v(int id) const {
    return nodes_[static_cast<std::size_t>(id)].value;
  }
  bool rg(Var a) const { return node(a).requires_grad; }

  std::vector<Node> nodes_;
};

// Builds a tape with `inputs` as differentiable leaves, evaluates
// fn (reducing a non-scalar result by summation), and compares analytic
// gradients against central finite differences with step `delta`.
// Returns the maximum relative error max(|a - n| / max(|a|, |n|, 1)).
using TapeFn = std::function<Var(Tape &, const std::vector<Var> &)>;
double grad_check(const TapeFn &fn, const std::vector<Tensor> &inputs,
                  double delta);

}  // namespace wsed

#endif  // WSED_TAPE_HPP_
