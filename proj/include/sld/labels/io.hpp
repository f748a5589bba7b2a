// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Label file: "SLDLBL01", u64 M, u64 C, u32 provenance length, provenance,
// f64 temperature, then M*C little-endian f64 in row-major order.

#pragma once

#include <filesystem>
#include <string>

#include "sld/labels/soft_labels.hpp"

namespace sld::labels {

std::string encode(const SoftLabelSet& labels);
SoftLabelSet decode(const std::string& bytes, const std::string& what = "labels");

void save(const std::filesystem::path& path, const SoftLabelSet& labels);
SoftLabelSet load(const std::filesystem::path& path);

/// row,c0..c{C-1}
void export_csv(const std::filesystem::path& path, const SoftLabelSet& labels);

}  // namespace sld::labels
