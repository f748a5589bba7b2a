// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "sld/labels/soft_labels.hpp"

namespace sld::labels {

/// Keep the k largest entries of each row (ties: lower class index kept),
/// zero the rest. No renormalization.
SoftLabelSet topk_truncate(const SoftLabelSet& labels, std::size_t k);

/// Exchange the scores of the i-th ranked (1-based) and last ranked class in
/// every row.
SoftLabelSet swap_label(const SoftLabelSet& labels, std::size_t i);

/// Zero column `cls` in every row whose hard label differs from `cls`.
/// No renormalization.
SoftLabelSet zero_class(const SoftLabelSet& labels, std::size_t cls, std::span<const int> row_labels);

/// Rows scaled to sum 1. Zero-mass rows are an error.
SoftLabelSet renormalize(const SoftLabelSet& labels);

/// Subset of rows (provenance unchanged).
SoftLabelSet select_rows(const SoftLabelSet& labels, std::span<const std::size_t> rows);

}  // namespace sld::labels
