// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint file: "SLDCKPT1" magic, u32 version, u32 layout length, layout
// JSON, u64 epoch, f64 test accuracy, u64 config hash, u64 seed, u64 count,
// then `count` little-endian f64 parameters in layout order.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sld/nn/train.hpp"

namespace sld::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::string& bytes, const std::string& what = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// <dir>/epoch_0007.ckpt
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t epoch);

/// All epoch_*.ckpt files of a run directory, sorted by epoch. All must share
/// one layout.
std::vector<Checkpoint> load_run(const std::filesystem::path& dir);

/// Picks `epoch` out of a checkpoint list; the error lists available epochs.
const Checkpoint& find_epoch(const std::vector<Checkpoint>& run, std::size_t epoch);

}  // namespace sld::nn
