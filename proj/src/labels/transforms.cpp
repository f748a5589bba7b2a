// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/labels/transforms.hpp"

#include "sld/util/error.hpp"

namespace sld::labels {

SoftLabelSet topk_truncate(const SoftLabelSet& labels, std::size_t k) {
    const std::size_t c = labels.classes();
    if (k < 1 || k > c) {
        throw ConfigError("topk_truncate: k=" + std::to_string(k) + " outside [1," + std::to_string(c) + "]");
    }
    SoftLabelSet out{ad::Tensor(labels.scores.shape()),
                     provenance::transformed(labels.provenance, "topk=" + std::to_string(k)), labels.temperature};
    for (std::size_t i = 0; i < labels.rows(); ++i) {
        const auto order = rank_order(labels.row(i));
        for (std::size_t r = 0; r < k; ++r) {
            out.scores.at(i, order[r]) = labels.scores.at(i, order[r]);
        }
    }
    return out;
}

SoftLabelSet swap_label(const SoftLabelSet& labels, std::size_t i) {
    const std::size_t c = labels.classes();
    if (i < 1 || i > c) {
        throw ConfigError("swap_label: i=" + std::to_string(i) + " outside [1," + std::to_string(c) + "]");
    }
    SoftLabelSet out{labels.scores, provenance::transformed(labels.provenance, "swap=" + std::to_string(i)),
                     labels.temperature};
    for (std::size_t r = 0; r < labels.rows(); ++r) {
        const auto order = rank_order(labels.row(r));
        std::swap(out.scores.at(r, order[i - 1]), out.scores.at(r, order[c - 1]));
    }
    return out;
}

SoftLabelSet zero_class(const SoftLabelSet& labels, std::size_t cls, std::span<const int> row_labels) {
    if (cls >= labels.classes()) {
        throw ConfigError("zero_class: class " + std::to_string(cls) + " out of range");
    }
    if (row_labels.size() != labels.rows()) {
        throw ShapeError("zero_class: " + std::to_string(row_labels.size()) + " row labels for " +
                         std::to_string(labels.rows()) + " rows");
    }
    SoftLabelSet out{labels.scores, provenance::transformed(labels.provenance, "zero-class=" + std::to_string(cls)),
                     labels.temperature};
    for (std::size_t r = 0; r < labels.rows(); ++r) {
        if (static_cast<std::size_t>(row_labels[r]) != cls) {
            out.scores.at(r, cls) = 0.0;
        }
    }
    return out;
}

SoftLabelSet renormalize(const SoftLabelSet& labels) {
    SoftLabelSet out{labels.scores, provenance::transformed(labels.provenance, "renormalized"), labels.temperature};
    for (std::size_t r = 0; r < labels.rows(); ++r) {
        double s = 0.0;
        for (double v : labels.row(r)) {
            s += v;
        }
        if (!(s > 0.0)) {
            throw DataError("renormalize: row " + std::to_string(r) + " has zero mass");
        }
        for (double& v : out.scores.row(r)) {
            v /= s;
        }
    }
    return out;
}

SoftLabelSet select_rows(const SoftLabelSet& labels, std::span<const std::size_t> rows) {
    const std::size_t c = labels.classes();
    SoftLabelSet out{ad::Tensor({rows.size(), c}), labels.provenance, labels.temperature};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= labels.rows()) {
            throw DataError("select_rows: row " + std::to_string(rows[i]) + " out of range");
        }
        const auto src = labels.row(rows[i]);
        std::copy(src.begin(), src.end(), out.scores.row(i).begin());
    }
    return out;
}

}  // namespace sld::labels
