// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cli/session.hpp"

namespace sld::cli {

struct Command {
    std::string name;
    std::string help;
    std::vector<std::string> keys;  // option keys accepted besides the global ones
    std::vector<std::pair<std::string, std::string>> defaults;
    bool needs_seed = true;
    std::function<void(Session&)> run;
};

const std::vector<Command>& commands();

}  // namespace sld::cli
