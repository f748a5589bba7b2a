// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/data/manifest.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>

#include <json.hpp>

#include "sld/data/cifar.hpp"
#include "sld/data/idx.hpp"
#include "sld/util/error.hpp"

#ifndef SLD_DEFAULT_DATA_ROOT
#define SLD_DEFAULT_DATA_ROOT "data"
#endif

namespace sld::data {
namespace {

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::string, Loader>& registry() {
    static std::map<std::string, Loader> r = {
        {"mnist", [](const std::filesystem::path& root) { return load_mnist(root / "mnist"); }},
        {"cifar10", [](const std::filesystem::path& root) { return load_cifar10_bin(root / "cifar-10-batches-bin"); }},
    };
    return r;
}

}  // namespace

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

DatasetManifest describe(const DatasetPair& pair, const std::filesystem::path& root) {
    DatasetManifest m;
    m.name = pair.train.name();
    m.root = root.string();
    m.train_size = pair.train.size();
    m.test_size = pair.test.size();
    m.num_classes = pair.train.num_classes();
    m.shape = pair.train.shape();
    m.normalization = pair.train.normalization();
    m.class_names = pair.train.class_names();
    m.train_hash = hex64(pair.train.hash());
    m.test_hash = hex64(pair.test.hash());
    return m;
}

std::string to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["name"] = m.name;
    j["root"] = m.root;
    j["train_size"] = m.train_size;
    j["test_size"] = m.test_size;
    j["num_classes"] = m.num_classes;
    j["shape"] = {m.shape.channels, m.shape.height, m.shape.width};
    j["normalization"] = {{"mean", m.normalization.mean}, {"stddev", m.normalization.stddev}};
    j["class_names"] = m.class_names;
    j["train_hash"] = m.train_hash;
    j["test_hash"] = m.test_hash;
    return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        DatasetManifest m;
        m.name = j.at("name").get<std::string>();
        m.root = j.at("root").get<std::string>();
        m.train_size = j.at("train_size").get<std::size_t>();
        m.test_size = j.at("test_size").get<std::size_t>();
        m.num_classes = j.at("num_classes").get<std::size_t>();
        const auto s = j.at("shape").get<std::vector<std::size_t>>();
        if (s.size() != 3) {
            throw FormatError("dataset manifest: shape must have 3 entries");
        }
        m.shape = {s[0], s[1], s[2]};
        m.normalization.mean = j.at("normalization").at("mean").get<std::vector<double>>();
        m.normalization.stddev = j.at("normalization").at("stddev").get<std::vector<double>>();
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        m.train_hash = j.at("train_hash").get<std::string>();
        m.test_hash = j.at("test_hash").get<std::string>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("dataset manifest: ") + e.what());
    }
}

void register_loader(const std::string& name, Loader loader) {
    std::lock_guard lock(registry_mutex());
    registry()[name] = std::move(loader);
}

std::vector<std::string> loader_names() {
    std::lock_guard lock(registry_mutex());
    std::vector<std::string> out;
    for (const auto& [k, v] : registry()) {
        out.push_back(k);
    }
    return out;
}

DatasetPair load_dataset(const std::string& name, const std::filesystem::path& root) {
    Loader loader;
    {
        std::lock_guard lock(registry_mutex());
        auto it = registry().find(name);
        if (it == registry().end()) {
            std::string known;
            for (const auto& [k, v] : registry()) {
                known += (known.empty() ? "" : ", ") + k;
            }
            throw ConfigError("unknown dataset '" + name + "' (known: " + known + ")");
        }
        loader = it->second;
    }
    return loader(root);
}

std::filesystem::path data_root() {
    if (const char* env = std::getenv("SLD_DATA_ROOT"); env != nullptr && *env != '\0') {
        return env;
    }
    return SLD_DEFAULT_DATA_ROOT;
}

}  // namespace sld::data
