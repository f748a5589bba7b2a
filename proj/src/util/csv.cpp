// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/util/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sld/util/error.hpp"

namespace sld::csv {

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw FormatError("csv: no column '" + name + "'");
}

const std::string& Table::text(std::size_t row, const std::string& name) const {
    return rows.at(row).at(column(name));
}

double Table::number(std::size_t row, const std::string& name) const {
    const std::string& s = text(row, name);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw FormatError("csv: column '" + name + "' row " + std::to_string(row) +
                          " is not a number: '" + s + "'");
    }
    return v;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

namespace {

void append_row(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].find_first_of(",\n") != std::string::npos) {
            throw FormatError("csv: field contains a separator: '" + fields[i] + "'");
        }
        if (i) {
            out += ',';
        }
        out += fields[i];
    }
    out += '\n';
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string to_string(const Table& table) {
    std::string out;
    append_row(out, table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw FormatError("csv: row has " + std::to_string(row.size()) + " fields, header has " +
                              std::to_string(table.header.size()));
        }
        append_row(out, row);
    }
    return out;
}

Table parse(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto fields = split(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != t.header.size()) {
                throw FormatError("csv: ragged row '" + line + "'");
            }
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw Error("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Table read(const std::filesystem::path& path) {
    return parse(read_file(path));
}

void write(const std::filesystem::path& path, const Table& table) {
    write_file_atomic(path, to_string(table));
}

}  // namespace sld::csv
