// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// IDX (MNIST family) reader. Files may be gzip-compressed.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sld/data/dataset.hpp"

namespace sld::data {

struct IdxArray {
    std::uint8_t type = 0;  // 0x08 = unsigned byte
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> payload;
};

/// Reads a whole file, inflating it when it carries a gzip header.
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

/// Header: 00 00 <type> <ndims>, then ndims big-endian u32 extents. Only u8
/// payloads are accepted. `what` names the source in error messages.
IdxArray parse_idx(std::span<const std::uint8_t> bytes, const std::string& what);

/// Pairs an idx3 image file (N x H x W) with an idx1 label file (N).
/// num_classes is inferred as max(label) + 1. Result is not normalized.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, Split split,
                 const std::string& name = "idx");

/// train-/t10k- image and label files (optionally .gz) under `dir`,
/// normalized with train-split constants.
DatasetPair load_mnist(const std::filesystem::path& dir);

}  // namespace sld::data
