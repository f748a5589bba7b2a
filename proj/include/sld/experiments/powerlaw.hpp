// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Data-knowledge power laws:
//   hard labels: acc = (ipc / a)^b - c
//   soft labels: acc = (s * ipc / a)^b - c
// fitted jointly by damped Gauss-Newton from several starts.

#pragma once

#include <optional>
#include <span>
#include <vector>

namespace sld::experiments {

struct CurvePoint {
    double ipc = 0.0;
    double accuracy = 0.0;
};

struct PowerLawFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double s = 1.0;
    double rmse = 0.0;
    double ipc_min = 0.0;
    double ipc_max = 0.0;

    double hard(double ipc) const;
    double soft(double ipc) const;
};

/// Reference TinyImageNet fit: a=29.9, b=0.077, c=0.8, s=6.04.
PowerLawFit tinyimagenet_reference();

/// Noiseless samples of the hard (soft = false) or soft curve.
std::vector<CurvePoint> sample_curve(const PowerLawFit& law, std::span<const double> ipcs, bool soft);

/// Joint fit over hard and soft points (both need >= 2 points, 5 or more in
/// total). Empty when every start fails or the best fit has b <= 0.
std::optional<PowerLawFit> fit_power_law(std::span<const CurvePoint> hard, std::span<const CurvePoint> soft);

/// Only s, with a, b, c held at `base` (per-k soft curves).
std::optional<double> fit_data_multiplier(const PowerLawFit& base, std::span<const CurvePoint> soft);

}  // namespace sld::experiments
