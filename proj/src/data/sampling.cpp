// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/data/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "sld/util/error.hpp"
#include "sld/util/rng.hpp"

namespace sld::data {
namespace {

std::vector<std::size_t> draw(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

DistilledSet sample_ipc(const Dataset& dataset, std::size_t ipc, std::uint64_t seed) {
    if (ipc == 0) {
        throw ConfigError("sample_ipc: ipc must be positive");
    }
    DistilledSet out;
    out.ipc = ipc;
    out.num_classes = dataset.num_classes();
    Rng rng(derive_seed(seed, {dataset.hash(), ipc}));
    for (std::size_t c = 0; c < dataset.num_classes(); ++c) {
        auto rows = dataset.class_indices(static_cast<int>(c));
        if (rows.size() < ipc) {
            throw DataError("sample_ipc: class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                            " examples, ipc=" + std::to_string(ipc));
        }
        auto chosen = draw(std::move(rows), ipc, rng);
        out.indices.insert(out.indices.end(), chosen.begin(), chosen.end());
    }
    return out;
}

std::vector<std::size_t> quantile_bounds(std::size_t n, std::size_t parts) {
    std::vector<std::size_t> b(parts + 1);
    for (std::size_t j = 0; j <= parts; ++j) {
        b[j] = j * n / parts;
    }
    return b;
}

DistilledSet select_by_ce(const Dataset& dataset, std::span<const double> ce, std::size_t ipc, std::size_t quantile,
                          std::uint64_t seed) {
    if (ce.size() != dataset.size()) {
        throw DataError("select_by_ce: " + std::to_string(ce.size()) + " scores for " +
                        std::to_string(dataset.size()) + " rows");
    }
    if (quantile < 1 || quantile > kCeQuantiles) {
        throw ConfigError("select_by_ce: quantile " + std::to_string(quantile) + " outside [1,10]");
    }
    DistilledSet out;
    out.ipc = ipc;
    out.num_classes = dataset.num_classes();
    Rng rng(derive_seed(seed, {dataset.hash(), ipc, quantile}));
    for (std::size_t c = 0; c < dataset.num_classes(); ++c) {
        auto rows = dataset.class_indices(static_cast<int>(c));
        std::stable_sort(rows.begin(), rows.end(),
                         [&](std::size_t a, std::size_t b) { return ce[a] < ce[b] || (ce[a] == ce[b] && a < b); });
        const auto bounds = quantile_bounds(rows.size(), kCeQuantiles);
        std::vector<std::size_t> pool(rows.begin() + static_cast<std::ptrdiff_t>(bounds[quantile - 1]),
                                      rows.begin() + static_cast<std::ptrdiff_t>(bounds[quantile]));
        if (pool.size() < ipc) {
            throw DataError("select_by_ce: class " + std::to_string(c) + " quantile " + std::to_string(quantile) +
                            " holds " + std::to_string(pool.size()) + " rows, ipc=" + std::to_string(ipc));
        }
        auto chosen = draw(std::move(pool), ipc, rng);
        out.indices.insert(out.indices.end(), chosen.begin(), chosen.end());
    }
    return out;
}

}  // namespace sld::data
