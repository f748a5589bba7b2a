// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Entropy is in nats; Jensen-Shannon distance uses base-2 logs (range [0,1]).

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "sld/data/dataset.hpp"
#include "sld/labels/soft_labels.hpp"
#include "sld/nn/train.hpp"

namespace sld::labels {

struct EntropyReport {
    std::vector<double> rows;  // nats
    double mean = 0.0;         // nats
};

/// H(row) = -sum p ln p with 0 ln 0 = 0.
EntropyReport entropy(const SoftLabelSet& labels);
double entropy(std::span<const double> row);

/// sqrt(KL(p||m)/2 + KL(q||m)/2), m = (p+q)/2, base 2. Both inputs are
/// renormalized first; a zero-mass input is an error.
double jsd(std::span<const double> p, std::span<const double> q);

/// Row-wise jsd of two aligned label sets.
std::vector<double> jsd_rows(const SoftLabelSet& a, const SoftLabelSet& b);

struct NormalizedJsd {
    std::vector<std::size_t> epochs;  // column order
    ad::Tensor raw;                   // [M, E] distances
    ad::Tensor normalized;            // [M, E] per-row min-max
    std::vector<std::size_t> flagged; // rows with constant distance (emitted as 0)

    /// Epoch with the smallest normalized distance per row (ties: earlier).
    std::vector<std::size_t> argmin_epochs() const;
};

/// Per row i and epoch l: (JSD(y_i, y_i^l) - min_k) / (max_k - min_k).
/// Needs at least two epochs.
NormalizedJsd normalized_jsd(const SoftLabelSet& learned, const std::map<std::size_t, SoftLabelSet>& by_epoch);

struct ClassSimilarity {
    ad::Tensor matrix;                   // [C, C], zero diagonal
    std::vector<std::size_t> group_size; // rows predicted as each class
    std::vector<std::size_t> empty;      // predicted classes with no rows (all-zero matrix rows)
};

/// Group rows by their argmax class, average the rows of each group, zero the
/// diagonal.
ClassSimilarity class_similarity_matrix(const SoftLabelSet& labels);
/// Same, with labels generated by `expert` (tau = 1) on the whole dataset.
ClassSimilarity class_similarity_matrix(const nn::Checkpoint& expert, const data::Dataset& dataset);

}  // namespace sld::labels
