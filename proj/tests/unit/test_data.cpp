// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "sld/data/cifar.hpp"
#include "sld/data/dataset.hpp"
#include "sld/data/idx.hpp"
#include "sld/data/manifest.hpp"
#include "sld/data/sampling.hpp"
#include "sld/util/error.hpp"

using namespace sld;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> idx_bytes(std::vector<std::uint32_t> dims, const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> b{0, 0, 0x08, static_cast<std::uint8_t>(dims.size())};
    for (auto d : dims) {
        for (int s = 24; s >= 0; s -= 8) {
            b.push_back(static_cast<std::uint8_t>(d >> s));
        }
    }
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sld_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// n rows, label i % classes, pixel value = row.
data::Dataset toy(std::size_t n, std::size_t classes) {
    std::vector<std::uint8_t> px(n * 4);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % classes);
        for (std::size_t k = 0; k < 4; ++k) {
            px[i * 4 + k] = static_cast<std::uint8_t>((i * 7 + k * 13) % 251);
        }
    }
    return data::Dataset("toy", data::Split::train, {1, 2, 2}, classes, std::move(px), std::move(y));
}

}  // namespace

TEST_CASE("IDX header constants") {
    const auto b = idx_bytes({2, 3, 4}, std::vector<std::uint8_t>(24, 1));
    const auto a = data::parse_idx(b, "mem");
    CHECK(a.type == 0x08);
    CHECK(a.dims.size() == 3);
    CHECK(a.payload.size() == 24);
}

TEST_CASE("IDX errors") {
    std::vector<std::uint8_t> bad{0x12, 0x34, 0x08, 0x01, 0, 0, 0, 0};
    try {
        data::parse_idx(bad, "bad");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("12 34 08 01") != std::string::npos);
    }
    auto truncated = idx_bytes({10}, std::vector<std::uint8_t>(3, 0));
    CHECK_THROWS_AS(data::parse_idx(truncated, "short"), FormatError);
    CHECK_THROWS_AS(data::parse_idx(std::vector<std::uint8_t>{0, 0, 8}, "tiny"), FormatError);
}

TEST_CASE("load_idx infers classes and checks counts") {
    TempDir dir;
    const std::size_t n = 20;
    std::vector<std::uint8_t> px(n * 9), lb(n);
    for (std::size_t i = 0; i < n; ++i) {
        lb[i] = static_cast<std::uint8_t>(i % 10);
        px[i * 9] = static_cast<std::uint8_t>(i);
    }
    write_bytes(dir.path / "img", idx_bytes({20, 3, 3}, px));
    write_bytes(dir.path / "lbl", idx_bytes({20}, lb));
    const auto ds = data::load_idx(dir.path / "img", dir.path / "lbl", data::Split::train);
    CHECK(ds.size() == 20);
    CHECK(ds.num_classes() == 10);
    CHECK(ds.shape() == data::ImageShape{1, 3, 3});

    write_bytes(dir.path / "lbl19", idx_bytes({19}, std::vector<std::uint8_t>(lb.begin(), lb.end() - 1)));
    CHECK_THROWS_AS(data::load_idx(dir.path / "img", dir.path / "lbl19", data::Split::train), DataError);
}

TEST_CASE("CIFAR-10 record layout") {
    CHECK(data::kCifarBatchRecords == 10000);
    CHECK(data::kCifarRecord == 1 + 3 * 32 * 32);
    std::vector<std::uint8_t> bytes(data::kCifarBatchRecords * data::kCifarRecord, 0);
    bytes[0] = 9;
    bytes[data::kCifarRecord] = 3;
    // pixel (c=2, h=5, w=7) of record 0
    bytes[1 + 2 * 1024 + 5 * 32 + 7] = 200;
    std::vector<std::uint8_t> px;
    std::vector<int> labels;
    data::parse_cifar10_batch(bytes, "mem", px, labels);
    REQUIRE(labels.size() == 10000);
    CHECK(labels[0] == 9);
    CHECK(data::cifar10_class_names()[9] == "truck");
    CHECK(px[2 * 1024 + 5 * 32 + 7] == 200);

    bytes.push_back(0);
    CHECK_THROWS_AS(data::parse_cifar10_batch(bytes, "ragged", px, labels), FormatError);
    bytes.pop_back();
    bytes[0] = 10;
    CHECK_THROWS_AS(data::parse_cifar10_batch(bytes, "label", px, labels), FormatError);
}

TEST_CASE("missing CIFAR directory reports the path") {
    try {
        data::load_cifar10_bin("/nonexistent/cifar-10-batches-bin");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/cifar-10-batches-bin") != std::string::npos);
    }
}

TEST_CASE("normalization refuses a second application") {
    data::DatasetPair p{toy(20, 2), toy(10, 2)};
    data::normalize_pair(p);
    CHECK(p.train.normalized());
    CHECK_THROWS_AS(p.train.normalize(p.train.normalization()), DataError);
    // train split standardized: mean ~0, stddev ~1
    const auto x = p.train.images();
    double m = 0, s = 0;
    for (double v : x.data()) {
        m += v;
    }
    m /= static_cast<double>(x.size());
    for (double v : x.data()) {
        s += (v - m) * (v - m);
    }
    CHECK(std::abs(m) < 1e-12);
    CHECK(std::sqrt(s / static_cast<double>(x.size())) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sample_ipc cardinality, balance and determinism") {
    const auto ds = toy(100, 10);
    const auto a = data::sample_ipc(ds, 1, 7);
    CHECK(a.size() == 10);
    std::set<int> seen;
    for (auto i : a.indices) {
        seen.insert(ds.label(i));
    }
    CHECK(seen.size() == 10);
    CHECK(data::sample_ipc(ds, 1, 7).indices == a.indices);
    const auto b = data::sample_ipc(ds, 3, 7);
    CHECK(b.size() == 30);
    CHECK(std::set<std::size_t>(b.indices.begin(), b.indices.end()).size() == 30);
    CHECK_THROWS_AS(data::sample_ipc(ds, 11, 7), DataError);
    CHECK_THROWS_AS(data::sample_ipc(ds, 0, 7), ConfigError);
}

TEST_CASE("select_by_ce quantiles and ties") {
    const auto ds = toy(200, 2);
    std::vector<double> ce(200);
    for (std::size_t i = 0; i < 200; ++i) {
        ce[i] = static_cast<double>(i);
    }
    // Lowest decile of class 0 holds rows 0,2,...,18.
    const auto low = data::select_by_ce(ds, ce, 3, 1, 1);
    for (auto i : low.indices) {
        CHECK(ce[i] < 20.0);
    }
    const auto high = data::select_by_ce(ds, ce, 3, 10, 1);
    for (auto i : high.indices) {
        CHECK(ce[i] >= 180.0);
    }
    // Uniform expert: every score equal, index order decides the deciles.
    std::vector<double> flat(200, 0.5);
    const auto f = data::select_by_ce(ds, flat, 4, 1, 1);
    CHECK(f.size() == 8);
    for (auto i : f.indices) {
        CHECK(i < 20);
    }
    CHECK_THROWS_AS(data::select_by_ce(ds, flat, 11, 1, 1), DataError);
    CHECK_THROWS_AS(data::select_by_ce(ds, flat, 1, 0, 1), ConfigError);
}

TEST_CASE("dataset manifest round trip") {
    data::DatasetPair p{toy(20, 2), toy(10, 2)};
    data::normalize_pair(p);
    const auto m = data::describe(p, "/data");
    const auto back = data::manifest_from_json(data::to_json(m));
    CHECK(back.train_hash == m.train_hash);
    CHECK(back.num_classes == 2);
    CHECK(back.normalization == m.normalization);
    CHECK_THROWS_AS(data::load_dataset("imagenet-22k", "/data"), ConfigError);
}
