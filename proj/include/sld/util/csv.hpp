// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal CSV: unquoted fields, no embedded commas. Numbers are formatted
// with fixed printf specs so files are byte-stable across runs.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sld::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws FormatError when absent.
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
    const std::string& text(std::size_t row, const std::string& name) const;
};

/// %.10g
std::string num(double v);
/// %.<digits>f
std::string fixed(double v, int digits);

std::string to_string(const Table& table);
Table parse(const std::string& text);

Table read(const std::filesystem::path& path);
/// Writes via a temporary file and rename, so readers never see partial files.
void write(const std::filesystem::path& path, const Table& table);

/// Whole-file helpers shared by the binary formats.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace sld::csv
