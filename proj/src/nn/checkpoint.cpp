// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/nn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>

#include "sld/util/csv.hpp"
#include "sld/util/error.hpp"

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace sld::nn {
namespace {

constexpr char kMagic[8] = {'S', 'L', 'D', 'C', 'K', 'P', 'T', '1'};

template <class T>
void put(std::string& out, T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.append(b, sizeof(T));
}

struct Reader {
    const std::string& bytes;
    const std::string& what;
    std::size_t pos = 0;

    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }

    void need(std::size_t n) const {
        if (bytes.size() - pos < n) {
            throw FormatError(what + ": truncated at byte " + std::to_string(pos) + " (need " + std::to_string(n) +
                              " more)");
        }
    }
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& c) {
    const std::string layout = c.spec.to_json();
    const auto flat = flatten(c.params);
    if (flat.size() != param_count(c.spec)) {
        throw ShapeError("checkpoint: parameter count does not match " + c.spec.describe());
    }
    std::string out(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(layout.size()));
    out += layout;
    put<std::uint64_t>(out, c.epoch);
    put<double>(out, c.test_accuracy);
    put<std::uint64_t>(out, c.config_hash);
    put<std::uint64_t>(out, c.seed);
    put<std::uint64_t>(out, flat.size());
    out.append(reinterpret_cast<const char*>(flat.data()), flat.size() * sizeof(double));
    return out;
}

Checkpoint decode_checkpoint(const std::string& bytes, const std::string& what) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw FormatError(what + ": not a checkpoint (bad magic)");
    }
    Reader r{bytes, what, sizeof kMagic};
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw FormatError(what + ": unsupported version " + std::to_string(version));
    }
    const auto len = r.get<std::uint32_t>();
    r.need(len);
    Checkpoint c;
    c.spec = ModelSpec::from_json(bytes.substr(r.pos, len));
    r.pos += len;
    c.epoch = r.get<std::uint64_t>();
    c.test_accuracy = r.get<double>();
    c.config_hash = r.get<std::uint64_t>();
    c.seed = r.get<std::uint64_t>();
    const auto count = r.get<std::uint64_t>();
    if (count != param_count(c.spec)) {
        throw FormatError(what + ": " + std::to_string(count) + " parameters, layout " + c.spec.describe() +
                          " needs " + std::to_string(param_count(c.spec)));
    }
    r.need(count * sizeof(double));
    std::vector<double> flat(count);
    std::memcpy(flat.data(), bytes.data() + r.pos, count * sizeof(double));
    c.params = unflatten(c.spec, flat);
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    csv::write_file_atomic(path, encode_checkpoint(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(csv::read_file(path), path.string());
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t epoch) {
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%04zu.ckpt", epoch);
    return dir / name;
}

std::vector<Checkpoint> load_run(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error("checkpoint directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.starts_with("epoch_") && name.ends_with(".ckpt")) {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<Checkpoint> out;
    for (const auto& f : files) {
        out.push_back(load_checkpoint(f));
        if (!(out.back().spec == out.front().spec)) {
            throw FormatError(f.string() + ": layout differs from the rest of the run");
        }
    }
    std::sort(out.begin(), out.end(), [](const Checkpoint& a, const Checkpoint& b) { return a.epoch < b.epoch; });
    if (out.empty()) {
        throw Error("no checkpoints in " + dir.string());
    }
    return out;
}

const Checkpoint& find_epoch(const std::vector<Checkpoint>& run, std::size_t epoch) {
    for (const auto& c : run) {
        if (c.epoch == epoch) {
            return c;
        }
    }
    std::string avail;
    for (const auto& c : run) {
        avail += (avail.empty() ? "" : ",") + std::to_string(c.epoch);
    }
    throw DataError("no checkpoint for epoch " + std::to_string(epoch) + " (available: " + avail + ")");
}

}  // namespace sld::nn
