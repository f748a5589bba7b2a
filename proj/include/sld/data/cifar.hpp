// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// CIFAR-10 binary batches: records of 1 label byte + 3072 pixel bytes,
// pixel (c,h,w) at offset 1 + c*1024 + h*32 + w.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sld/data/dataset.hpp"

namespace sld::data {

inline constexpr std::size_t kCifarRecord = 3073;
inline constexpr std::size_t kCifarBatchRecords = 10000;

/// Canonical class order (label byte 9 is "truck").
const std::vector<std::string>& cifar10_class_names();

/// Appends the records of one batch file. The record count must be a
/// positive multiple of 10000.
void parse_cifar10_batch(std::span<const std::uint8_t> bytes, const std::string& what,
                         std::vector<std::uint8_t>& pixels, std::vector<int>& labels);

/// data_batch_1..5.bin (train, file order) and test_batch.bin, normalized
/// with train-split constants.
DatasetPair load_cifar10_bin(const std::filesystem::path& dir);

}  // namespace sld::data
