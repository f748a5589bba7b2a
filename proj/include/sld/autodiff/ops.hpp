// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable primitives. All inputs must live on the same tape; shape
// mismatches raise sld::ShapeError naming the op and both shapes.

#pragma once

#include <cstddef>
#include <vector>

#include "sld/autodiff/tape.hpp"

namespace sld::ad {

// Elementwise (identical shapes).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double value);
Var relu(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var reciprocal(const Var& a);
Var rsqrt(const Var& a);

/// op(a)[m,k] * op(b)[k,n] for rank-2 operands.
Var matmul(const Var& a, const Var& b, bool trans_a = false, bool trans_b = false);

/// Sum of all elements, rank-0 result.
Var sum(const Var& a);
Var mean(const Var& a);
/// Broadcast a one-element tensor to `shape` (adjoint of sum).
Var expand(const Var& a, const Shape& shape);

/// [R,C] -> [R,1] and its adjoint [R,1] -> [R,C].
Var sum_rows(const Var& a);
Var broadcast_cols(const Var& a, std::size_t cols);
/// [R,C] -> [1,C] and its adjoint [1,C] -> [R,C].
Var sum_cols(const Var& a);
Var broadcast_rows(const Var& a, std::size_t rows);

/// Row-wise softmax / log-softmax of a rank-2 tensor, max-subtracted.
Var softmax(const Var& a);
Var log_softmax(const Var& a);

/// Rows `rows` of a rank-2 tensor, and the adjoint scatter-add into `total` rows.
Var take_rows(const Var& a, const std::vector<std::size_t>& rows);
Var scatter_rows(const Var& g, const std::vector<std::size_t>& rows, std::size_t total);

Var reshape(const Var& a, const Shape& shape);
/// [A,B,...] -> [B,A,...]
Var swap01(const Var& a);

/// Patch extraction for stride-1 square kernels on [C,N,H,W] input:
/// result [C*k*k, N*Ho*Wo] with Ho = H + 2*pad - k + 1.
Var im2col(const Var& x, std::size_t kernel, std::size_t pad);
/// Adjoint of im2col: scatter-add columns back into `image_shape` ([C,N,H,W]).
Var col2im(const Var& cols, const Shape& image_shape, std::size_t kernel, std::size_t pad);

/// 2x2 average pooling on [R,H,W] (odd edges dropped) and its adjoint.
Var avgpool2(const Var& x);
Var avgpool2_adjoint(const Var& g, const Shape& input_shape);

/// Convolution of x [N,C,H,W] with weight [Cout,C,k,k], stride 1, zero padding.
Var conv2d(const Var& x, const Var& weight, std::size_t pad);

}  // namespace sld::ad
