// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dataset manifests (JSON) and the format-pluggable loader registry.

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sld/data/dataset.hpp"

namespace sld::data {

struct DatasetManifest {
    std::string name;
    std::string root;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t num_classes = 0;
    ImageShape shape;
    Normalization normalization;
    std::vector<std::string> class_names;
    std::string train_hash;  // hex
    std::string test_hash;
};

DatasetManifest describe(const DatasetPair& pair, const std::filesystem::path& root);
std::string to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);

using Loader = std::function<DatasetPair(const std::filesystem::path& root)>;

/// Built-in: "mnist" (root/mnist), "cifar10" (root/cifar-10-batches-bin).
void register_loader(const std::string& name, Loader loader);
std::vector<std::string> loader_names();
DatasetPair load_dataset(const std::string& name, const std::filesystem::path& root);

/// SLD_DATA_ROOT when set, else the directory configured at build time.
std::filesystem::path data_root();

std::string hex64(std::uint64_t v);

}  // namespace sld::data
