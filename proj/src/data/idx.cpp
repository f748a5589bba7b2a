// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/data/idx.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "sld/util/error.hpp"

namespace sld::data {
namespace {

std::string hex4(std::span<const std::uint8_t> b) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02x %02x %02x %02x", b.size() > 0 ? b[0] : 0, b.size() > 1 ? b[1] : 0,
                  b.size() > 2 ? b[2] : 0, b.size() > 3 ? b[3] : 0);
    return buf;
}

std::filesystem::path find_variant(const std::filesystem::path& dir, const std::string& stem) {
    for (const char* suffix : {"", ".gz"}) {
        auto p = dir / (stem + suffix);
        if (std::filesystem::exists(p)) {
            return p;
        }
    }
    throw DataError("missing " + (dir / stem).string() + "[.gz]");
}

}  // namespace

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    // gzread passes uncompressed files through unchanged.
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (f == nullptr) {
        throw DataError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> buf(1 << 20);
    for (;;) {
        const int n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
        if (n < 0) {
            int code = 0;
            std::string msg = gzerror(f, &code);
            gzclose(f);
            throw FormatError(path.string() + ": " + msg);
        }
        if (n == 0) {
            break;
        }
        out.insert(out.end(), buf.begin(), buf.begin() + n);
    }
    gzclose(f);
    return out;
}

IdxArray parse_idx(std::span<const std::uint8_t> bytes, const std::string& what) {
    if (bytes.size() < 4 || bytes[0] != 0 || bytes[1] != 0) {
        throw FormatError(what + ": bad IDX magic, observed bytes " + hex4(bytes));
    }
    IdxArray a;
    a.type = bytes[2];
    if (a.type != 0x08) {
        throw FormatError(what + ": unsupported IDX element type, observed bytes " + hex4(bytes));
    }
    const std::size_t nd = bytes[3];
    if (nd == 0 || bytes.size() < 4 + 4 * nd) {
        throw FormatError(what + ": truncated IDX header (" + std::to_string(bytes.size()) + " bytes, " +
                          std::to_string(nd) + " dims)");
    }
    std::size_t count = 1;
    for (std::size_t d = 0; d < nd; ++d) {
        const std::uint8_t* p = bytes.data() + 4 + 4 * d;
        const std::uint32_t v = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
                                (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
        a.dims.push_back(v);
        count *= v;
    }
    const std::size_t offset = 4 + 4 * nd;
    if (bytes.size() - offset < count) {
        throw FormatError(what + ": payload length " + std::to_string(bytes.size() - offset) + " < expected " +
                          std::to_string(count));
    }
    a.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                     bytes.begin() + static_cast<std::ptrdiff_t>(offset + count));
    return a;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, Split split,
                 const std::string& name) {
    IdxArray im = parse_idx(read_bytes(images), images.string());
    IdxArray lb = parse_idx(read_bytes(labels), labels.string());
    if (im.dims.size() != 3) {
        throw FormatError(images.string() + ": expected 3 dims, got " + std::to_string(im.dims.size()));
    }
    if (lb.dims.size() != 1) {
        throw FormatError(labels.string() + ": expected 1 dim, got " + std::to_string(lb.dims.size()));
    }
    if (im.dims[0] != lb.dims[0]) {
        throw DataError("idx: " + std::to_string(im.dims[0]) + " images but " + std::to_string(lb.dims[0]) +
                        " labels");
    }
    std::vector<int> y(lb.payload.begin(), lb.payload.end());
    const int max_label = y.empty() ? 0 : *std::max_element(y.begin(), y.end());
    return Dataset(name, split, ImageShape{1, im.dims[1], im.dims[2]}, static_cast<std::size_t>(max_label) + 1,
                   std::move(im.payload), std::move(y));
}

DatasetPair load_mnist(const std::filesystem::path& dir) {
    DatasetPair p{
        load_idx(find_variant(dir, "train-images-idx3-ubyte"), find_variant(dir, "train-labels-idx1-ubyte"),
                 Split::train, "mnist"),
        load_idx(find_variant(dir, "t10k-images-idx3-ubyte"), find_variant(dir, "t10k-labels-idx1-ubyte"),
                 Split::test, "mnist")};
    if (p.test.num_classes() != p.train.num_classes()) {
        // Test class count follows the train split.
        p.test = Dataset("mnist", Split::test, p.test.shape(), p.train.num_classes(),
                         std::vector<std::uint8_t>(p.test.pixels().begin(), p.test.pixels().end()), p.test.labels());
    }
    p.train.check_class_coverage();
    std::vector<std::string> names;
    for (std::size_t c = 0; c < p.train.num_classes(); ++c) {
        names.push_back(std::to_string(c));
    }
    p.train.set_class_names(names);
    p.test.set_class_names(names);
    normalize_pair(p);
    return p;
}

}  // namespace sld::data
