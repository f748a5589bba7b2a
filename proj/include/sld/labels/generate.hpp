// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "sld/labels/soft_labels.hpp"
#include "sld/nn/train.hpp"

namespace sld::labels {

/// softmax(logits / tau) per row.
SoftLabelSet from_logits(const ad::Tensor& logits, double tau, std::string provenance);

/// Expert labels for images [M, C, H, W].
SoftLabelSet gen_soft(const nn::Checkpoint& expert, const ad::Tensor& images, double tau);

/// softmax(mean over experts of logits / tau). Needs two or more experts with
/// the same output width.
SoftLabelSet gen_ensemble(const std::vector<const nn::Checkpoint*>& experts, const ad::Tensor& images, double tau);

}  // namespace sld::labels
