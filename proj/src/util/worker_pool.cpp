// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/util/worker_pool.hpp"

namespace sld {

std::size_t default_jobs() noexcept {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

}  // namespace sld
