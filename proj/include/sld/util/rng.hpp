// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace sld {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Combine a master seed with a sequence of tags into a new seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept;

/// Deterministic random source. The engine (mt19937_64) has a standard-mandated
/// output sequence; the distributions below are implemented here rather than
/// taken from <random> so results do not depend on the standard library vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). Rejection sampling, unbiased.
    std::size_t uniform_index(std::size_t n);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller.
    double normal();

    template <class T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// 64-bit FNV-1a over raw bytes, chainable through `seed`.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

}  // namespace sld
