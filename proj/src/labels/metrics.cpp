// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/labels/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sld/labels/generate.hpp"
#include "sld/util/error.hpp"

namespace sld::labels {

double entropy(std::span<const double> row) {
    double h = 0.0;
    for (double p : row) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

EntropyReport entropy(const SoftLabelSet& labels) {
    EntropyReport r;
    r.rows.reserve(labels.rows());
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.rows(); ++i) {
        r.rows.push_back(entropy(labels.row(i)));
        sum += r.rows.back();
    }
    r.mean = labels.rows() ? sum / static_cast<double>(labels.rows()) : 0.0;
    return r;
}

namespace {

double mass(std::span<const double> p, const char* which) {
    double s = 0.0;
    for (double v : p) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw DataError(std::string("jsd: ") + which + " has a negative or non-finite entry");
        }
        s += v;
    }
    if (!(s > 0.0)) {
        throw DataError(std::string("jsd: ") + which + " has zero mass");
    }
    return s;
}

// sum a_i log2(a_i / m_i) over a_i > 0
double kl_to_mid(std::span<const double> a, double sa, std::span<const double> b, double sb) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a[i] / sa;
        if (ai > 0.0) {
            const double mi = (ai + b[i] / sb) * 0.5;
            s += ai * std::log2(ai / mi);
        }
    }
    return s;
}

}  // namespace

double jsd(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw ShapeError("jsd: lengths " + std::to_string(p.size()) + " vs " + std::to_string(q.size()));
    }
    const double sp = mass(p, "p");
    const double sq = mass(q, "q");
    // a + b == b + a in IEEE arithmetic, so the swap symmetry is exact.
    const double d = 0.5 * kl_to_mid(p, sp, q, sq) + 0.5 * kl_to_mid(q, sq, p, sp);
    return std::min(1.0, std::sqrt(std::max(0.0, d)));
}

std::vector<double> jsd_rows(const SoftLabelSet& a, const SoftLabelSet& b) {
    if (a.scores.shape() != b.scores.shape()) {
        throw ShapeError("jsd_rows: " + ad::shape_str(a.scores.shape()) + " vs " + ad::shape_str(b.scores.shape()));
    }
    std::vector<double> out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        out[i] = jsd(a.row(i), b.row(i));
    }
    return out;
}

std::vector<std::size_t> NormalizedJsd::argmin_epochs() const {
    std::vector<std::size_t> out;
    const std::size_t m = normalized.dim(0), e = normalized.dim(1);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < e; ++j) {
            if (raw.at(i, j) < raw.at(i, best)) {
                best = j;
            }
        }
        out.push_back(epochs[best]);
    }
    return out;
}

NormalizedJsd normalized_jsd(const SoftLabelSet& learned, const std::map<std::size_t, SoftLabelSet>& by_epoch) {
    if (by_epoch.size() < 2) {
        throw ConfigError("normalized_jsd: min-max normalization needs at least 2 epochs, got " +
                          std::to_string(by_epoch.size()));
    }
    NormalizedJsd r;
    const std::size_t m = learned.rows();
    const std::size_t e = by_epoch.size();
    r.raw = ad::Tensor({m, e});
    r.normalized = ad::Tensor({m, e});
    std::size_t col = 0;
    for (const auto& [epoch, set] : by_epoch) {
        r.epochs.push_back(epoch);
        const auto d = jsd_rows(learned, set);
        for (std::size_t i = 0; i < m; ++i) {
            r.raw.at(i, col) = d[i];
        }
        ++col;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = r.raw.row(i);
        const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        if (*hi == *lo) {
            r.flagged.push_back(i);
            continue;
        }
        for (std::size_t j = 0; j < e; ++j) {
            r.normalized.at(i, j) = (row[j] - *lo) / (*hi - *lo);
        }
    }
    return r;
}

ClassSimilarity class_similarity_matrix(const SoftLabelSet& labels) {
    const std::size_t c = labels.classes();
    ClassSimilarity s;
    s.matrix = ad::Tensor({c, c});
    s.group_size.assign(c, 0);
    for (std::size_t i = 0; i < labels.rows(); ++i) {
        const auto row = labels.row(i);
        const std::size_t pred = rank_order(row)[0];
        ++s.group_size[pred];
        for (std::size_t j = 0; j < c; ++j) {
            s.matrix.at(pred, j) += row[j];
        }
    }
    for (std::size_t k = 0; k < c; ++k) {
        if (s.group_size[k] == 0) {
            s.empty.push_back(k);
            continue;
        }
        for (std::size_t j = 0; j < c; ++j) {
            s.matrix.at(k, j) /= static_cast<double>(s.group_size[k]);
        }
        s.matrix.at(k, k) = 0.0;
    }
    return s;
}

ClassSimilarity class_similarity_matrix(const nn::Checkpoint& expert, const data::Dataset& dataset) {
    return class_similarity_matrix(gen_soft(expert, dataset.images(), 1.0));
}

}  // namespace sld::labels
