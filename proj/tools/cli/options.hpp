// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Resolved settings for one command: flag > config file > built-in default.
// Config files are INI; key "student.lr" lives in section [student].

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sld::cli {

/// Bad invocation: unknown or conflicting options, missing inputs. Exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OptionSpec {
    std::string key;   // "student.lr"
    std::string flag;  // "--student-lr"
    std::string fallback;
    std::string help;
    bool is_switch = false;
};

const std::vector<OptionSpec>& option_table();
const OptionSpec& option(const std::string& key);

class Settings {
public:
    void set_flag(const std::string& key, const std::string& value);
    /// Command-specific built-in default, replacing the table entry.
    void set_default(const std::string& key, const std::string& value);
    /// Later files do not override keys already set from an earlier source.
    void load_ini(const std::filesystem::path& path);

    bool has(const std::string& key) const;  // flag or file, not default
    std::string text(const std::string& key) const;
    double number(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<std::size_t> counts(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;

    /// key -> {value, source} for every key the command touched.
    nlohmann::json resolved() const;

private:
    struct Entry {
        std::string value;
        std::string source;
    };
    std::map<std::string, Entry> given_;
    std::map<std::string, std::string> defaults_;
    mutable std::map<std::string, Entry> used_;
};

std::vector<std::string> split_list(const std::string& s);

}  // namespace sld::cli
