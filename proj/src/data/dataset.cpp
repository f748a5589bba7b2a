// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/data/dataset.hpp"

#include <cmath>

#include "sld/util/error.hpp"
#include "sld/util/rng.hpp"

namespace sld::data {

const char* split_name(Split split) noexcept {
    return split == Split::train ? "train" : "test";
}

Dataset::Dataset(std::string name, Split split, ImageShape shape, std::size_t num_classes,
                 std::vector<std::uint8_t> pixels, std::vector<int> labels)
    : name_(std::move(name)),
      split_(split),
      shape_(shape),
      num_classes_(num_classes),
      pixels_(std::move(pixels)),
      labels_(std::move(labels)) {
    if (pixels_.size() != labels_.size() * shape_.size()) {
        throw DataError("dataset '" + name_ + "': " + std::to_string(pixels_.size()) + " pixel bytes for " +
                        std::to_string(labels_.size()) + " images of " + std::to_string(shape_.size()));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] < 0 || static_cast<std::size_t>(labels_[i]) >= num_classes_) {
            throw DataError("dataset '" + name_ + "': label " + std::to_string(labels_[i]) + " at row " +
                            std::to_string(i) + " outside [0," + std::to_string(num_classes_) + ")");
        }
    }
}

void Dataset::set_class_names(std::vector<std::string> names) {
    if (names.size() != num_classes_) {
        throw DataError("dataset '" + name_ + "': " + std::to_string(names.size()) + " class names for " +
                        std::to_string(num_classes_) + " classes");
    }
    class_names_ = std::move(names);
}

void Dataset::normalize(const Normalization& norm) {
    if (normalized_) {
        throw DataError("dataset '" + name_ + "' (" + split_name(split_) + ") is already normalized");
    }
    if (norm.mean.size() != shape_.channels || norm.stddev.size() != shape_.channels) {
        throw DataError("dataset '" + name_ + "': normalization has " + std::to_string(norm.mean.size()) +
                        " channels, images have " + std::to_string(shape_.channels));
    }
    for (double s : norm.stddev) {
        if (!(s > 0.0)) {
            throw DataError("dataset '" + name_ + "': non-positive channel stddev");
        }
    }
    norm_ = norm;
    normalized_ = true;
}

ad::Tensor Dataset::images(std::span<const std::size_t> rows) const {
    const std::size_t per = shape_.size();
    const std::size_t plane = shape_.height * shape_.width;
    ad::Tensor out({rows.size(), shape_.channels, shape_.height, shape_.width});
    double* dst = out.ptr();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= size()) {
            throw DataError("dataset '" + name_ + "': row " + std::to_string(rows[r]) + " out of range");
        }
        const std::uint8_t* src = pixels_.data() + rows[r] * per;
        for (std::size_t c = 0; c < shape_.channels; ++c) {
            const double m = normalized_ ? norm_.mean[c] : 0.0;
            const double inv = normalized_ ? 1.0 / norm_.stddev[c] : 1.0;
            for (std::size_t p = 0; p < plane; ++p) {
                const std::size_t k = c * plane + p;
                dst[r * per + k] = (static_cast<double>(src[k]) / 255.0 - m) * inv;
            }
        }
    }
    return out;
}

ad::Tensor Dataset::images() const {
    std::vector<std::size_t> rows(size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    return images(rows);
}

std::vector<int> Dataset::labels(std::span<const std::size_t> rows) const {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) {
        out.push_back(labels_.at(r));
    }
    return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(num_classes_, 0);
    for (int y : labels_) {
        ++counts[static_cast<std::size_t>(y)];
    }
    return counts;
}

std::vector<std::size_t> Dataset::class_indices(int c) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == c) {
            out.push_back(i);
        }
    }
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    const std::size_t per = shape_.size();
    std::vector<std::uint8_t> px;
    px.reserve(rows.size() * per);
    std::vector<int> lb;
    lb.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= size()) {
            throw DataError("dataset '" + name_ + "': row " + std::to_string(r) + " out of range");
        }
        px.insert(px.end(), pixels_.begin() + static_cast<std::ptrdiff_t>(r * per),
                  pixels_.begin() + static_cast<std::ptrdiff_t>((r + 1) * per));
        lb.push_back(labels_[r]);
    }
    Dataset out(name_, split_, shape_, num_classes_, std::move(px), std::move(lb));
    out.class_names_ = class_names_;
    out.norm_ = norm_;
    out.normalized_ = normalized_;
    return out;
}

Dataset Dataset::head(std::size_t n) const {
    std::vector<std::size_t> rows(std::min(n, size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    return subset(rows);
}

std::uint64_t Dataset::hash() const noexcept {
    const std::uint64_t dims[4] = {shape_.channels, shape_.height, shape_.width, num_classes_};
    std::uint64_t h = fnv1a64(dims, sizeof dims);
    h = fnv1a64(labels_.data(), labels_.size() * sizeof(int), h);
    return fnv1a64(pixels_.data(), pixels_.size(), h);
}

void Dataset::check_class_coverage() const {
    const auto counts = class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) {
            throw DataError("dataset '" + name_ + "' (" + split_name(split_) + "): class " + std::to_string(c) +
                            " has no examples");
        }
    }
}

Normalization compute_normalization(const Dataset& train) {
    const auto& s = train.shape();
    const std::size_t plane = s.height * s.width;
    Normalization n;
    n.mean.assign(s.channels, 0.0);
    n.stddev.assign(s.channels, 0.0);
    if (train.empty()) {
        throw DataError("compute_normalization: empty dataset");
    }
    const auto px = train.pixels();
    for (std::size_t c = 0; c < s.channels; ++c) {
        double sum = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            const std::uint8_t* p = px.data() + i * s.size() + c * plane;
            for (std::size_t k = 0; k < plane; ++k) {
                const double v = p[k] / 255.0;
                sum += v;
                sq += v * v;
            }
        }
        const double count = static_cast<double>(train.size() * plane);
        const double mean = sum / count;
        n.mean[c] = mean;
        n.stddev[c] = std::sqrt(std::max(sq / count - mean * mean, 1e-12));
    }
    return n;
}

void normalize_pair(DatasetPair& pair) {
    const Normalization n = compute_normalization(pair.train);
    pair.train.normalize(n);
    pair.test.normalize(n);
}

}  // namespace sld::data
