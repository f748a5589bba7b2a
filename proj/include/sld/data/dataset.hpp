// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Image classification data kept as raw u8 pixels plus per-channel
// standardization constants. Normalized f64 batches are materialized on
// demand, so every consumer sees the same preprocessing.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sld/autodiff/tensor.hpp"

namespace sld::data {

enum class Split { train, test };

const char* split_name(Split split) noexcept;

/// Per-channel mean and standard deviation of pixel/255.
struct Normalization {
    std::vector<double> mean;
    std::vector<double> stddev;

    bool operator==(const Normalization&) const = default;
};

struct ImageShape {
    std::size_t channels = 1;
    std::size_t height = 1;
    std::size_t width = 1;

    std::size_t size() const noexcept { return channels * height * width; }
    bool operator==(const ImageShape&) const = default;
};

class Dataset {
public:
    Dataset() = default;
    /// Pixels are [N, C, H, W] row-major bytes. Labels must lie in [0, num_classes).
    Dataset(std::string name, Split split, ImageShape shape, std::size_t num_classes,
            std::vector<std::uint8_t> pixels, std::vector<int> labels);

    const std::string& name() const noexcept { return name_; }
    Split split() const noexcept { return split_; }
    const ImageShape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    std::size_t num_classes() const noexcept { return num_classes_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    int label(std::size_t i) const { return labels_.at(i); }
    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    void set_class_names(std::vector<std::string> names);

    /// Installs standardization constants. Refuses a second application.
    void normalize(const Normalization& norm);
    bool normalized() const noexcept { return normalized_; }
    const Normalization& normalization() const noexcept { return norm_; }

    /// Normalized images [n, C, H, W] for the given rows (or all rows).
    ad::Tensor images(std::span<const std::size_t> rows) const;
    ad::Tensor images() const;
    std::vector<int> labels(std::span<const std::size_t> rows) const;

    std::vector<std::size_t> class_counts() const;
    /// Row indices of class c in ascending order.
    std::vector<std::size_t> class_indices(int c) const;

    /// Copy of the selected rows (keeps normalization and names).
    Dataset subset(std::span<const std::size_t> rows) const;
    /// First n rows.
    Dataset head(std::size_t n) const;

    /// FNV-1a over shape, labels and pixels.
    std::uint64_t hash() const noexcept;

    /// Every class appears at least once (train split requirement).
    void check_class_coverage() const;

private:
    std::string name_;
    Split split_ = Split::train;
    ImageShape shape_;
    std::size_t num_classes_ = 0;
    std::vector<std::uint8_t> pixels_;
    std::vector<int> labels_;
    std::vector<std::string> class_names_;
    Normalization norm_;
    bool normalized_ = false;
};

/// Per-channel constants of pixel/255 over a whole split.
Normalization compute_normalization(const Dataset& train);

struct DatasetPair {
    Dataset train;
    Dataset test;
};

/// Standardizes both splits with constants computed from the train split.
void normalize_pair(DatasetPair& pair);

}  // namespace sld::data
