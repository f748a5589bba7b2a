// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sld/autodiff/tensor.hpp"

namespace sld::labels {

/// Row-per-image class scores: probability rows, or sub-probability rows
/// after truncation. `provenance` records how the rows were produced, e.g.
/// "transformed(single-expert(11), topk=10)".
struct SoftLabelSet {
    ad::Tensor scores;  // [M, C]
    std::string provenance;
    double temperature = 1.0;

    std::size_t rows() const { return scores.dim(0); }
    std::size_t classes() const { return scores.dim(1); }
    std::span<const double> row(std::size_t i) const { return scores.row(i); }

    /// Entries finite and >= 0; with `normalized`, every row sums to 1 within 1e-9.
    void validate(bool normalized) const;
};

namespace provenance {

std::string single_expert(std::size_t epoch);
std::string ensemble(std::span<const std::size_t> epochs, std::span<const std::uint64_t> seeds);
std::string hard();
std::string bptt();
std::string transformed(const std::string& parent, const std::string& transform);

}  // namespace provenance

/// One-hot rows for integer labels, provenance "hard".
SoftLabelSet hard_labels(std::span<const int> labels, std::size_t num_classes);

/// Row i keeps the class order: descending score, ties by ascending class.
std::vector<std::size_t> rank_order(std::span<const double> row);

}  // namespace sld::labels
