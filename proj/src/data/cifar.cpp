// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/data/cifar.hpp"

#include "sld/data/idx.hpp"
#include "sld/util/error.hpp"

namespace sld::data {

const std::vector<std::string>& cifar10_class_names() {
    static const std::vector<std::string> names = {"airplane", "automobile", "bird",  "cat",  "deer",
                                                   "dog",      "frog",       "horse", "ship", "truck"};
    return names;
}

void parse_cifar10_batch(std::span<const std::uint8_t> bytes, const std::string& what,
                         std::vector<std::uint8_t>& pixels, std::vector<int>& labels) {
    if (bytes.size() % kCifarRecord != 0) {
        throw FormatError(what + ": size " + std::to_string(bytes.size()) + " is not a whole number of " +
                          std::to_string(kCifarRecord) + "-byte records");
    }
    const std::size_t n = bytes.size() / kCifarRecord;
    if (n == 0 || n % kCifarBatchRecords != 0) {
        throw FormatError(what + ": " + std::to_string(n) + " records, expected a multiple of " +
                          std::to_string(kCifarBatchRecords));
    }
    pixels.reserve(pixels.size() + n * (kCifarRecord - 1));
    for (std::size_t r = 0; r < n; ++r) {
        const std::uint8_t* rec = bytes.data() + r * kCifarRecord;
        if (rec[0] > 9) {
            throw FormatError(what + ": record " + std::to_string(r) + " has label byte " + std::to_string(rec[0]));
        }
        labels.push_back(rec[0]);
        pixels.insert(pixels.end(), rec + 1, rec + kCifarRecord);
    }
}

DatasetPair load_cifar10_bin(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("CIFAR-10 binary directory not found: " + dir.string());
    }
    auto load = [&](const std::vector<std::string>& files, Split split) {
        std::vector<std::uint8_t> px;
        std::vector<int> y;
        for (const auto& f : files) {
            const auto path = dir / f;
            if (!std::filesystem::exists(path)) {
                throw DataError("missing CIFAR-10 batch " + path.string());
            }
            parse_cifar10_batch(read_bytes(path), path.string(), px, y);
        }
        Dataset d("cifar10", split, ImageShape{3, 32, 32}, 10, std::move(px), std::move(y));
        d.set_class_names(cifar10_class_names());
        return d;
    };
    DatasetPair p{load({"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin", "data_batch_4.bin",
                        "data_batch_5.bin"},
                       Split::train),
                  load({"test_batch.bin"}, Split::test)};
    p.train.check_class_coverage();
    normalize_pair(p);
    return p;
}

}  // namespace sld::data
