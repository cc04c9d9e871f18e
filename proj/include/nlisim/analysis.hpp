#pragma once

// Sinusoid fitting of fringe traces and SNR-based visibility clamping.
//
// The model y(x) = O + C cos(kx) + S sin(kx), k = 2 pi / period, is linear in
// (O, C, S) for a fixed period and is solved in closed form from the 3x3
// normal equations. When the period is floated it is refined by a coarse grid
// followed by golden-section search on the residual sum of squares.

#include "nlisim/errors.hpp"
#include "nlisim/scan.hpp"
#include "nlisim/units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace nlisim {

struct FitOptions {
    double period_hint = 0.0;       ///< m
    bool fit_period = false;        ///< refine the period within +-10% of the hint
    bool poisson_weighted = false;  ///< weight residuals by 1/max(y,1)
};

struct FringeFit {
    double offset = 0.0;        ///< counts
    double amplitude_fit = 0.0; ///< counts, half peak-to-trough
    double phase0 = 0.0;        ///< rad, y = O + B cos(2 pi x / period + phase0)
    double period = 0.0;        ///< m
    double r_squared = 0.0;
    double snr = 0.0;
    double visibility_raw = 0.0;
    double visibility_clamped = 0.0;
    double amplitude_pp = 0.0;  ///< counts, peak-to-trough
    double ss_res = 0.0;
    std::size_t points = 0;
};

inline constexpr std::size_t kMinFitPoints = 6;
inline constexpr double kPeriodSearchWindow = 0.10;

/// R^2 / (1 - R^2); R^2 = 1 maps to +infinity.
inline double snr_from_r2(double r_squared) {
    if (!(r_squared >= 0.0 && r_squared <= 1.0))
        throw PhysicsError("R^2 must lie in [0,1], got " + std::to_string(r_squared));
    if (r_squared == 1.0) return std::numeric_limits<double>::infinity();
    return r_squared / (1.0 - r_squared);
}

/// Zero below SNR 1, otherwise the raw visibility.
inline double clamp_visibility(const FringeFit& fit) {
    return fit.snr < 1.0 ? 0.0 : fit.visibility_raw;
}

namespace detail {

struct LinearSinusoid {
    double offset = 0.0;
    double c = 0.0;
    double s = 0.0;
    double ss_res = 0.0;
    bool ok = false;
};

inline bool solve3(std::array<std::array<double, 4>, 3> m, std::array<double, 3>& out) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        if (std::abs(m[pivot][col]) < 1e-300) return false;
        std::swap(m[pivot], m[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
        }
    }
    for (int r = 0; r < 3; ++r) out[r] = m[r][3] / m[r][r];
    return true;
}

inline LinearSinusoid fit_fixed_period(std::span<const double> x, std::span<const double> y,
                                       std::span<const double> w, double period, double x_ref) {
    const double k = kTwoPi / period;
    // Normal equations in the basis (1, cos, sin); columns 0..2 matrix, column 3 rhs.
    std::array<std::array<double, 4>, 3> m{};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double arg = k * (x[i] - x_ref);
        const std::array<double, 3> b{1.0, std::cos(arg), std::sin(arg)};
        for (int r = 0; r < 3; ++r) {
            for (int col = 0; col < 3; ++col) m[r][col] += w[i] * b[r] * b[col];
            m[r][3] += w[i] * b[r] * y[i];
        }
    }
    LinearSinusoid out;
    std::array<double, 3> coef{};
    if (!solve3(m, coef)) return out;
    out.offset = coef[0];
    // Rotate the coefficients from the x_ref frame back to absolute positions.
    const double ph = k * x_ref;
    out.c = coef[1] * std::cos(ph) - coef[2] * std::sin(ph);
    out.s = coef[1] * std::sin(ph) + coef[2] * std::cos(ph);
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double arg = k * (x[i] - x_ref);
        const double r = y[i] - (coef[0] + coef[1] * std::cos(arg) + coef[2] * std::sin(arg));
        ss += w[i] * r * r;
    }
    out.ss_res = ss;
    out.ok = true;
    return out;
}

} // namespace detail

inline FringeFit fit_fringe(std::span<const double> x, std::span<const double> y, const FitOptions& opt) {
    if (x.size() != y.size()) throw FitError("position and count arrays differ in length");
    if (x.size() < kMinFitPoints)
        throw FitError("sinusoid fit needs at least " + std::to_string(kMinFitPoints) + " points, got " +
                       std::to_string(x.size()));
    if (!(opt.period_hint > 0.0) || !std::isfinite(opt.period_hint)) throw FitError("period hint must be > 0");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw FitError("trace contains non-finite values");

    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    const double span = *xmax_it - *xmin_it;
    if (!(span > 0.0)) throw FitError("positions have zero spread");
    if (span < opt.period_hint * (1.0 - 1e-9))
        throw FitError("trace spans less than one period of the hint");
    const double x_ref = 0.5 * (*xmin_it + *xmax_it);

    std::vector<double> w(x.size(), 1.0);
    if (opt.poisson_weighted)
        for (std::size_t i = 0; i < y.size(); ++i) w[i] = 1.0 / std::max(y[i], 1.0);

    double period = opt.period_hint;
    auto best = detail::fit_fixed_period(x, y, w, period, x_ref);
    if (!best.ok) throw FitError("sinusoid normal equations are singular");

    if (opt.fit_period) {
        auto ssr = [&](double p) {
            const auto f = detail::fit_fixed_period(x, y, w, p, x_ref);
            return f.ok ? f.ss_res : std::numeric_limits<double>::infinity();
        };
        const double lo = opt.period_hint * (1.0 - kPeriodSearchWindow);
        const double hi = opt.period_hint * (1.0 + kPeriodSearchWindow);
        constexpr int kGrid = 81;
        const double step = (hi - lo) / (kGrid - 1);
        int best_k = 0;
        double best_ss = std::numeric_limits<double>::infinity();
        for (int k = 0; k < kGrid; ++k) {
            const double s = ssr(lo + k * step);
            if (s < best_ss) { best_ss = s; best_k = k; }
        }
        double a = lo + std::max(best_k - 1, 0) * step;
        double b = lo + std::min(best_k + 1, kGrid - 1) * step;
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = ssr(c), fd = ssr(d);
        for (int it = 0; it < 200 && (b - a) > 1e-13 * opt.period_hint; ++it) {
            if (fc < fd) {
                b = d; d = c; fd = fc;
                c = b - inv_phi * (b - a); fc = ssr(c);
            } else {
                a = c; c = d; fc = fd;
                d = a + inv_phi * (b - a); fd = ssr(d);
            }
        }
        const double refined = 0.5 * (a + b);
        const auto candidate = detail::fit_fixed_period(x, y, w, refined, x_ref);
        if (candidate.ok && candidate.ss_res <= best.ss_res) {
            best = candidate;
            period = refined;
        }
    }

    double wsum = 0.0, wy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) { wsum += w[i]; wy += w[i] * y[i]; }
    const double mean = wy / wsum;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) ss_tot += w[i] * (y[i] - mean) * (y[i] - mean);

    FringeFit fit;
    fit.points = x.size();
    fit.period = period;
    fit.offset = best.offset;
    fit.ss_res = best.ss_res;
    if (ss_tot > 0.0) {
        fit.amplitude_fit = std::hypot(best.c, best.s);
        fit.phase0 = std::atan2(-best.s, best.c);
        fit.r_squared = std::clamp(1.0 - best.ss_res / ss_tot, 0.0, 1.0);
    } else {
        // Constant trace: no fringe at all.
        fit.offset = mean;
        fit.ss_res = 0.0;
    }
    fit.snr = snr_from_r2(fit.r_squared);
    fit.amplitude_pp = 2.0 * fit.amplitude_fit;
    if (!(fit.offset > 0.0)) throw FitError("fitted offset is not positive; visibility undefined");
    fit.visibility_raw = fit.amplitude_fit / fit.offset;
    fit.visibility_clamped = clamp_visibility(fit);
    return fit;
}

inline FringeFit fit_fringe(const ScanRecord& rec, const FitOptions& opt) {
    return fit_fringe(std::span<const double>(rec.position), std::span<const double>(rec.counts), opt);
}

} // namespace nlisim
