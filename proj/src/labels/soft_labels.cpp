// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/labels/soft_labels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sld/util/error.hpp"

namespace sld::labels {

void SoftLabelSet::validate(bool normalized) const {
    if (scores.rank() != 2) {
        throw ShapeError("soft labels: expected [M,C], got " + ad::shape_str(scores.shape()));
    }
    for (std::size_t i = 0; i < rows(); ++i) {
        double s = 0.0;
        for (double v : row(i)) {
            if (!std::isfinite(v) || v < 0.0) {
                throw DataError("soft labels (" + provenance + "): row " + std::to_string(i) +
                                " has a negative or non-finite entry");
            }
            s += v;
        }
        if (normalized && std::abs(s - 1.0) > 1e-9) {
            throw DataError("soft labels (" + provenance + "): row " + std::to_string(i) + " sums to " +
                            std::to_string(s));
        }
    }
}

namespace provenance {

std::string single_expert(std::size_t epoch) {
    return "single-expert(" + std::to_string(epoch) + ")";
}

std::string ensemble(std::span<const std::size_t> epochs, std::span<const std::uint64_t> seeds) {
    std::string e, s;
    for (auto v : epochs) {
        e += (e.empty() ? "" : " ") + std::to_string(v);
    }
    for (auto v : seeds) {
        s += (s.empty() ? "" : " ") + std::to_string(v);
    }
    return "ensemble(epochs=" + e + "; seeds=" + s + ")";
}

std::string hard() {
    return "hard";
}

std::string bptt() {
    return "bptt";
}

std::string transformed(const std::string& parent, const std::string& transform) {
    return "transformed(" + parent + ", " + transform + ")";
}

}  // namespace provenance

SoftLabelSet hard_labels(std::span<const int> labels, std::size_t num_classes) {
    SoftLabelSet out;
    out.scores = ad::Tensor({labels.size(), num_classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw DataError("hard_labels: label " + std::to_string(labels[i]) + " out of range");
        }
        out.scores.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    out.provenance = provenance::hard();
    return out;
}

std::vector<std::size_t> rank_order(std::span<const double> row) {
    std::vector<std::size_t> idx(row.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    return idx;
}

}  // namespace sld::labels
