// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "sld/autodiff/tape.hpp"

namespace sld::nn {

/// -sum_i sum_c t_ic * log softmax(z_i / tau)_c / batch. Targets must be
/// nonnegative; rows may sum to less than one.
ad::Var soft_ce_loss(const ad::Var& logits, const ad::Tensor& targets, double tau = 1.0);
/// Same with differentiable targets (label learning).
ad::Var soft_ce_loss(const ad::Var& logits, const ad::Var& targets, double tau = 1.0);

ad::Tensor one_hot(std::span<const int> labels, std::size_t num_classes);

/// Plain cross-entropy against integer labels.
ad::Var hard_ce_loss(const ad::Var& logits, std::span<const int> labels);

/// Per-row -log softmax(z)_y, value only.
std::vector<double> per_row_ce(const ad::Tensor& logits, std::span<const int> labels);

/// Row-wise softmax(z / tau), value only.
ad::Tensor softmax_rows(const ad::Tensor& logits, double tau = 1.0);

}  // namespace sld::nn
