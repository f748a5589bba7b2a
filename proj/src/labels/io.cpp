// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/labels/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

#include "sld/util/csv.hpp"
#include "sld/util/error.hpp"

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace sld::labels {
namespace {

constexpr char kMagic[8] = {'S', 'L', 'D', 'L', 'B', 'L', '0', '1'};

template <class T>
void put(std::string& out, T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.append(b, sizeof(T));
}

}  // namespace

std::string encode(const SoftLabelSet& labels) {
    std::string out(kMagic, sizeof kMagic);
    put<std::uint64_t>(out, labels.rows());
    put<std::uint64_t>(out, labels.classes());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(labels.provenance.size()));
    out += labels.provenance;
    put<double>(out, labels.temperature);
    out.append(reinterpret_cast<const char*>(labels.scores.ptr()), labels.scores.size() * sizeof(double));
    return out;
}

SoftLabelSet decode(const std::string& bytes, const std::string& what) {
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (bytes.size() - pos < n) {
            throw FormatError(what + ": truncated at byte " + std::to_string(pos));
        }
    };
    auto get = [&]<class T>(T*) {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    };
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw FormatError(what + ": not a label file (bad magic)");
    }
    pos = sizeof kMagic;
    const auto m = get(static_cast<std::uint64_t*>(nullptr));
    const auto c = get(static_cast<std::uint64_t*>(nullptr));
    const auto plen = get(static_cast<std::uint32_t*>(nullptr));
    need(plen);
    SoftLabelSet out;
    out.provenance = bytes.substr(pos, plen);
    pos += plen;
    out.temperature = get(static_cast<double*>(nullptr));
    need(m * c * sizeof(double));
    out.scores = ad::Tensor({m, c});
    std::memcpy(out.scores.ptr(), bytes.data() + pos, m * c * sizeof(double));
    pos += m * c * sizeof(double);
    if (pos != bytes.size()) {
        throw FormatError(what + ": " + std::to_string(bytes.size() - pos) + " trailing bytes");
    }
    out.validate(false);
    return out;
}

void save(const std::filesystem::path& path, const SoftLabelSet& labels) {
    csv::write_file_atomic(path, encode(labels));
}

SoftLabelSet load(const std::filesystem::path& path) {
    return decode(csv::read_file(path), path.string());
}

void export_csv(const std::filesystem::path& path, const SoftLabelSet& labels) {
    csv::Table t;
    t.header.push_back("row");
    for (std::size_t j = 0; j < labels.classes(); ++j) {
        t.header.push_back("c" + std::to_string(j));
    }
    for (std::size_t i = 0; i < labels.rows(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (double v : labels.row(i)) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            row.emplace_back(buf);
        }
        t.rows.push_back(std::move(row));
    }
    csv::write(path, t);
}

}  // namespace sld::labels
