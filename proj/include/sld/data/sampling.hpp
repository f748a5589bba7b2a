// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sld/data/dataset.hpp"

namespace sld::data {

/// Rows of a parent dataset chosen as the distilled images, grouped by class
/// (class 0 first), ipc rows per class, ascending within a class.
struct DistilledSet {
    std::vector<std::size_t> indices;
    std::size_t ipc = 0;
    std::size_t num_classes = 0;

    std::size_t size() const noexcept { return indices.size(); }
};

/// ipc distinct uniformly random rows per class. Depends only on
/// (dataset hash, ipc, seed).
DistilledSet sample_ipc(const Dataset& dataset, std::size_t ipc, std::uint64_t seed);

/// Quantile boundaries for n ranked items split into `parts` groups whose
/// sizes differ by at most one: group j is [bounds[j], bounds[j+1]).
std::vector<std::size_t> quantile_bounds(std::size_t n, std::size_t parts);

inline constexpr std::size_t kCeQuantiles = 10;

/// Per class, rank rows by `ce` ascending (ties by row index), split into ten
/// quantiles (1 = lowest cross-entropy) and draw ipc rows uniformly from
/// quantile q.
DistilledSet select_by_ce(const Dataset& dataset, std::span<const double> ce, std::size_t ipc, std::size_t quantile,
                          std::uint64_t seed);

}  // namespace sld::data
