// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/util/rng.hpp"

#include <cmath>
#include <numbers>

namespace sld {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t t : tags) {
        h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
    }
    return h;
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n <= 1) {
        return 0;
    }
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return static_cast<std::size_t>(x % bound);
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) {
        u1 = uniform01();
    }
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace sld
