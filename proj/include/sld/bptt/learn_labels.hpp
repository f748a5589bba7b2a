// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Label learning by truncated back-propagation through an unrolled student.
// Labels are logits; the student trains on softmax(logits) with plain SGD
// for T steps, gradients flow through the last M steps only, and the outer
// loss is hard-label cross-entropy on a batch of real data.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sld/autodiff/tensor.hpp"
#include "sld/data/dataset.hpp"
#include "sld/labels/soft_labels.hpp"
#include "sld/nn/model.hpp"
#include "sld/util/csv.hpp"

namespace sld::bptt {

struct BpttConfig {
    std::size_t unroll_steps = 20;     // T
    std::size_t window = 20;           // M, 1 <= M <= T
    double inner_lr = 0.01;            // alpha_1
    double label_lr = 1.0;             // alpha_2
    std::size_t outer_iters = 100;
    std::size_t target_batch = 256;
    std::size_t distilled_batch = 256; // full distilled set when it fits
    double clip_norm = 1.0;            // global norm of the meta-gradient
    double init_scale = 5.0;           // init logits = init_scale * one_hot
    bool cosine = false;               // cosine decay of alpha_2
    std::size_t plateau_patience = 0;  // 0 = run all outer iterations
    double plateau_tol = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Logits whose softmax is close to one-hot(labels).
ad::Tensor init_logits(std::span<const int> labels, std::size_t num_classes, double scale);

struct MetaGradient {
    ad::Tensor grad;  // d target_loss / d label logits
    double target_loss = 0.0;
};

/// Exact gradient of the target loss at theta_T with respect to the label
/// logits through the last `window` of `unroll_steps` inner SGD steps.
/// `inner_batches[n]` selects distilled rows for step n (empty = all rows).
MetaGradient meta_gradient(const ad::Tensor& label_logits, const nn::Params& student_init,
                           const ad::Tensor& distilled_images,
                           const std::vector<std::vector<std::size_t>>& inner_batches,
                           const ad::Tensor& target_images, std::span<const int> target_labels,
                           const nn::ModelSpec& spec, const BpttConfig& config);

struct TraceRow {
    std::size_t outer_iter = 0;
    double target_loss = 0.0;
    double metagrad_norm = 0.0;
    bool clipped = false;
    bool retried = false;
};

struct BpttResult {
    labels::SoftLabelSet labels;  // softmax of final logits, provenance "bptt"
    ad::Tensor logits;
    std::vector<TraceRow> trace;
};

/// Distilled images stay fixed; only the label logits are optimized.
BpttResult learn_labels(const data::Dataset& target, const ad::Tensor& distilled_images,
                        std::span<const int> distilled_labels, const nn::ModelSpec& spec, const BpttConfig& config);

/// outer_iter,target_loss,metagrad_norm,clipped
csv::Table trace_table(const std::vector<TraceRow>& trace);

}  // namespace sld::bptt
