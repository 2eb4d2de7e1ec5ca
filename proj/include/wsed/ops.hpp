// wsed/ops.hpp

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

#ifndef WSED_OPS_HPP_
#define WSED_OPS_HPP_

#include "wsed/tensor.hpp"

namespace wsed {

// Forward-only tensor operations.  All of them validate shapes (throwing
// DimensionError that names both shapes) and are deterministic: identical
// inputs give bit-identical outputs on the same kernel backend.

enum class Padding { kSame, kValid };

// C[MxN] = A[MxP] * B[PxN]
Tensor matmul(const Tensor &a, const Tensor &b);

// C[MxN] = A[MxP] * B[NxP]^T
Tensor matmul_nt(const Tensor &a, const Tensor &b);

// C[MxN] = A[PxM]^T * B[PxN]
Tensor matmul_tn(const Tensor &a, const Tensor &b);

// 2-D cross-correlation (no kernel flip) over the trailing two axes.
// x: [C_in x T x F], k: [C_out x C_in x kh x kw] -> [C_out x T' x F'].
// kSame pads zeros so T' = T, F' = F; for even kernel sizes the extra
// padding cell goes to the trailing side.  kValid requires kh <= T and
// kw <= F and yields T' = T-kh+1, F' = F-kw+1.
Tensor conv2d(const Tensor &x, const Tensor &k, Padding padding);

// Numerically stable logistic; output strictly inside (0, 1) up to
// floating-point rounding.
Tensor sigmoid(const Tensor &x);

Tensor relu(const Tensor &x);

Tensor exp(const Tensor &x);

Tensor clamp(const Tensor &x, double lo, double hi);

// Shift-invariant softmax along the given axis of a 1-D or 2-D tensor.
// For 1-D tensors axis must be 0.  Each slice sums to 1.
Tensor softmax(const Tensor &x, int axis);

// Mean pooling over non-overlapping [wh x ww] windows of the trailing two
// axes of a [C x T x F] tensor; trailing remainder cells are dropped.
Tensor avg_pool2d(const Tensor &x, int wh, int ww);

// Elementwise helpers (same shape required).
Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);
Tensor scale(const Tensor &a, double c);

namespace convdetail {
// Zero-padded copy of one [t x f] channel into a [tp x fp] buffer with
// pad_t leading rows and pad_l leading columns.  Shared by the forward
// convolution and its gradient.
void pad_channel(const double *src, int t, int f, int pad_t, int pad_l,
                 int tp, int fp, double *dst);
}  // namespace convdetail

}  // namespace wsed

#endif  // WSED_OPS_HPP_
