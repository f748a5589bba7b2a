// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/experiments/powerlaw.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace sld::experiments {

double PowerLawFit::hard(double ipc) const {
    return std::pow(ipc / a, b) - c;
}

double PowerLawFit::soft(double ipc) const {
    return std::pow(s * ipc / a, b) - c;
}

PowerLawFit tinyimagenet_reference() {
    PowerLawFit f;
    f.a = 29.9;
    f.b = 0.077;
    f.c = 0.8;
    f.s = 6.04;
    return f;
}

std::vector<CurvePoint> sample_curve(const PowerLawFit& law, std::span<const double> ipcs, bool soft) {
    std::vector<CurvePoint> out;
    for (double x : ipcs) {
        out.push_back({x, soft ? law.soft(x) : law.hard(x)});
    }
    return out;
}

namespace {

constexpr int kParams = 4;  // log a, b, c, log s
using Vec = std::array<double, kParams>;
using Mat = std::array<std::array<double, kParams>, kParams>;

struct Problem {
    std::span<const CurvePoint> hard;
    std::span<const CurvePoint> soft;
    bool fit_s = true;
    bool fit_abc = true;
};

// Residuals and Jacobian rows for every point.
double evaluate(const Problem& pr, const Vec& p, std::vector<double>* r, std::vector<Vec>* jac) {
    const double la = p[0], b = p[1], c = p[2], ls = p[3];
    double sse = 0.0;
    if (r) {
        r->clear();
    }
    if (jac) {
        jac->clear();
    }
    auto one = [&](const CurvePoint& pt, bool soft) {
        const double u = std::log(pt.ipc) + (soft ? ls : 0.0) - la;
        const double e = std::exp(b * u);
        const double res = e - c - pt.accuracy;
        sse += res * res;
        if (r) {
            r->push_back(res);
        }
        if (jac) {
            jac->push_back({-b * e, u * e, -1.0, soft ? b * e : 0.0});
        }
    };
    for (const auto& pt : pr.hard) {
        one(pt, false);
    }
    for (const auto& pt : pr.soft) {
        one(pt, true);
    }
    return sse;
}

// Solves A x = y in place by Gaussian elimination with partial pivoting.
bool solve(Mat a, Vec y, Vec& x, const std::array<bool, kParams>& active) {
    int idx[kParams];
    int n = 0;
    for (int i = 0; i < kParams; ++i) {
        if (active[i]) {
            idx[n++] = i;
        }
    }
    double m[kParams][kParams + 1];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m[i][j] = a[idx[i]][idx[j]];
        }
        m[i][n] = y[idx[i]];
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row) {
            if (std::abs(m[row][col]) > std::abs(m[piv][col])) {
                piv = row;
            }
        }
        if (!(std::abs(m[piv][col]) > 1e-300)) {
            return false;
        }
        for (int j = 0; j <= n; ++j) {
            std::swap(m[col][j], m[piv][j]);
        }
        for (int row = 0; row < n; ++row) {
            if (row == col) {
                continue;
            }
            const double f = m[row][col] / m[col][col];
            for (int j = col; j <= n; ++j) {
                m[row][j] -= f * m[col][j];
            }
        }
    }
    x = {};
    for (int i = 0; i < n; ++i) {
        x[idx[i]] = m[i][n] / m[i][i];
    }
    return true;
}

struct LmResult {
    Vec p;
    double sse;
    bool ok;
};

LmResult levenberg_marquardt(const Problem& pr, Vec p) {
    const std::array<bool, kParams> active = {pr.fit_abc, pr.fit_abc, pr.fit_abc, pr.fit_s};
    std::vector<double> r;
    std::vector<Vec> jac;
    double sse = evaluate(pr, p, &r, &jac);
    if (!std::isfinite(sse)) {
        return {p, sse, false};
    }
    double lambda = 1e-3;
    for (int iter = 0; iter < 2000; ++iter) {
        Mat jtj{};
        Vec jtr{};
        for (std::size_t k = 0; k < r.size(); ++k) {
            for (int i = 0; i < kParams; ++i) {
                jtr[i] += jac[k][i] * r[k];
                for (int j = 0; j < kParams; ++j) {
                    jtj[i][j] += jac[k][i] * jac[k][j];
                }
            }
        }
        bool improved = false;
        for (int tries = 0; tries < 30 && !improved; ++tries) {
            Mat a = jtj;
            Vec rhs{};
            for (int i = 0; i < kParams; ++i) {
                a[i][i] += lambda * std::max(jtj[i][i], 1e-12);
                rhs[i] = -jtr[i];
            }
            Vec step;
            if (!solve(a, rhs, step, active)) {
                lambda *= 10;
                continue;
            }
            Vec trial = p;
            for (int i = 0; i < kParams; ++i) {
                trial[i] += step[i];
            }
            const double t = evaluate(pr, trial, nullptr, nullptr);
            if (std::isfinite(t) && t <= sse) {
                const double gain = sse - t;
                p = trial;
                sse = evaluate(pr, p, &r, &jac);
                lambda = std::max(lambda / 10, 1e-15);
                improved = true;
                double step_norm = 0.0;
                for (double v : step) {
                    step_norm = std::max(step_norm, std::abs(v));
                }
                if (gain <= 1e-30 + 1e-15 * sse && step_norm < 1e-12) {
                    return {p, sse, true};
                }
            } else {
                lambda *= 10;
            }
        }
        if (!improved) {
            break;
        }
    }
    return {p, sse, std::isfinite(sse)};
}

// Given log a, b, log s, the best c is a mean residual.
double best_c(const Problem& pr, const Vec& p) {
    double sum = 0.0;
    std::size_t n = 0;
    auto add = [&](const CurvePoint& pt, bool soft) {
        sum += std::exp(p[1] * (std::log(pt.ipc) + (soft ? p[3] : 0.0) - p[0])) - pt.accuracy;
        ++n;
    };
    for (const auto& pt : pr.hard) {
        add(pt, false);
    }
    for (const auto& pt : pr.soft) {
        add(pt, true);
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

double domain_min(std::span<const CurvePoint> a, std::span<const CurvePoint> b) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : a) {
        m = std::min(m, p.ipc);
    }
    for (const auto& p : b) {
        m = std::min(m, p.ipc);
    }
    return m;
}

double domain_max(std::span<const CurvePoint> a, std::span<const CurvePoint> b) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : a) {
        m = std::max(m, p.ipc);
    }
    for (const auto& p : b) {
        m = std::max(m, p.ipc);
    }
    return m;
}

bool positive_ipcs(std::span<const CurvePoint> pts) {
    for (const auto& p : pts) {
        if (!(p.ipc > 0.0) || !std::isfinite(p.accuracy)) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::optional<PowerLawFit> fit_power_law(std::span<const CurvePoint> hard, std::span<const CurvePoint> soft) {
    if (hard.size() < 2 || soft.size() < 2 || hard.size() + soft.size() < 5 || !positive_ipcs(hard) ||
        !positive_ipcs(soft)) {
        return std::nullopt;
    }
    const Problem pr{hard, soft, true, true};
    LmResult best{{}, std::numeric_limits<double>::infinity(), false};
    auto consider = [&](Vec start) {
        start[2] = best_c(pr, start);
        LmResult r = levenberg_marquardt(pr, start);
        if (r.ok && r.p[1] > 0.0 && r.sse < best.sse) {
            best = r;
        }
    };
    // 5 log-spaced starts for a and for b, s from 1 and 4.
    for (int ia = 0; ia < 5; ++ia) {
        for (int ib = 0; ib < 5; ++ib) {
            for (double s0 : {1.0, 4.0}) {
                consider({std::log(std::pow(10.0, -1.0 + ia)), std::pow(10.0, -2.0 + 0.5 * ib), 0.0, std::log(s0)});
            }
        }
    }
    if (!best.ok) {
        // Coarse grid, then local refinement of the best cell.
        Vec cell{};
        double cell_sse = std::numeric_limits<double>::infinity();
        for (int ia = 0; ia <= 40; ++ia) {
            for (int ib = 1; ib <= 40; ++ib) {
                for (int is = 0; is <= 20; ++is) {
                    Vec p{std::log(std::pow(10.0, -2.0 + 0.15 * ia)), 0.02 * ib, 0.0, std::log(std::pow(10.0, -1.0 + 0.15 * is))};
                    p[2] = best_c(pr, p);
                    const double e = evaluate(pr, p, nullptr, nullptr);
                    if (std::isfinite(e) && e < cell_sse) {
                        cell_sse = e;
                        cell = p;
                    }
                }
            }
        }
        if (std::isfinite(cell_sse)) {
            LmResult r = levenberg_marquardt(pr, cell);
            if (r.ok && r.p[1] > 0.0) {
                best = r;
            }
        }
    }
    if (!best.ok) {
        return std::nullopt;
    }
    PowerLawFit f;
    f.a = std::exp(best.p[0]);
    f.b = best.p[1];
    f.c = best.p[2];
    f.s = std::exp(best.p[3]);
    f.rmse = std::sqrt(best.sse / static_cast<double>(hard.size() + soft.size()));
    f.ipc_min = domain_min(hard, soft);
    f.ipc_max = domain_max(hard, soft);
    // A curve that does not rise over its own domain means b collapsed to ~0:
    // the data carry no power-law trend and a, b are not identifiable.
    if (!(f.hard(f.ipc_max) - f.hard(f.ipc_min) > 1e-6)) {
        return std::nullopt;
    }
    return f;
}

std::optional<double> fit_data_multiplier(const PowerLawFit& base, std::span<const CurvePoint> soft) {
    if (soft.empty() || !positive_ipcs(soft) || !(base.a > 0.0) || !(base.b > 0.0)) {
        return std::nullopt;
    }
    const Problem pr{{}, soft, true, false};
    LmResult best{{}, std::numeric_limits<double>::infinity(), false};
    for (double s0 : {0.1, 1.0, 10.0}) {
        LmResult r = levenberg_marquardt(pr, {std::log(base.a), base.b, base.c, std::log(s0)});
        if (r.ok && r.sse < best.sse) {
            best = r;
        }
    }
    if (!best.ok) {
        return std::nullopt;
    }
    return std::exp(best.p[3]);
}

}  // namespace sld::experiments
