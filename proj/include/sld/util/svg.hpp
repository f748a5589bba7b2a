// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Standalone SVG figures: line charts and heatmaps. Inputs are plain numbers;
// callers read them from CSV.

#pragma once

#include <string>
#include <vector>

namespace sld::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    std::vector<Series> series;
};

std::string render(const LineChart& chart);

struct Heatmap {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::string> x_ticks;
    std::vector<std::string> y_ticks;
    std::vector<std::vector<double>> values;  // [row][col]
};

std::string render(const Heatmap& map);

}  // namespace sld::svg
