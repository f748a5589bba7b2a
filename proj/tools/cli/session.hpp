// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// One command invocation: its run directory, settings and manifest.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/options.hpp"

namespace sld::cli {

inline constexpr const char* kVersion = "0.1.0";

class Session {
public:
    Session(std::string command, std::vector<std::string> argv, std::filesystem::path out, std::uint64_t seed,
            Settings settings);

    const std::string& command() const noexcept { return command_; }
    const std::filesystem::path& out() const noexcept { return out_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const Settings& settings() const noexcept { return settings_; }
    std::size_t jobs() const;

    /// Path of an output file; always inside the run directory.
    std::filesystem::path path(const std::string& name) const;
    void write_text(const std::string& name, const std::string& text) const;

    /// Record an input file (hashed) or a named input hash.
    void input_file(const std::filesystem::path& file);
    void input_hash(const std::string& name, const std::string& hex);
    void note(const std::string& key, nlohmann::json value);

    /// Write manifest.json with status "running" / the final status.
    void begin();
    void finish(const std::string& status);

private:
    void write_manifest() const;

    std::string command_;
    std::vector<std::string> argv_;
    std::filesystem::path out_;
    std::uint64_t seed_;
    Settings settings_;
    nlohmann::json inputs_ = nlohmann::json::object();
    nlohmann::json notes_ = nlohmann::json::object();
    std::string started_;
    std::string finished_;
    std::string status_ = "running";
};

std::string hash_file(const std::filesystem::path& file);

}  // namespace sld::cli
