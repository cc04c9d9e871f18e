#include "nlisim/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using namespace nlisim;

struct Trace {
    std::vector<double> x, y;
};

Trace sinusoid(double offset, double amp, double phase, double period, double span, int n) {
    Trace t;
    t.x = linspace(0.0, span, n);
    for (double x : t.x) t.y.push_back(offset + amp * std::cos(kTwoPi * x / period + phase));
    return t;
}

Trace poisson_trace(double offset, double vis, double period, int n, std::uint64_t seed) {
    Trace t = sinusoid(offset, vis * offset, 0.3, period, 3.0 * period, n);
    std::mt19937_64 rng(mix64(seed));
    for (double& y : t.y) y = static_cast<double>(std::poisson_distribution<long long>(y)(rng));
    return t;
}

TEST(FitFringe, ExactRecoveryFixedPeriod) {
    const double period = 3393e-9;
    const auto t = sinusoid(1500.0, 600.0, 1.1, period, 2.3 * period, 200);
    const auto f = fit_fringe(t.x, t.y, {period, false, false});
    EXPECT_NEAR(f.offset, 1500.0, 1500.0 * 1e-6);
    EXPECT_NEAR(f.amplitude_fit, 600.0, 600.0 * 1e-6);
    EXPECT_NEAR(f.phase0, 1.1, 1e-6);
    EXPECT_NEAR(f.visibility_raw, 0.4, 1e-6);
    EXPECT_NEAR(f.amplitude_pp, 1200.0, 1e-3);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_GT(f.snr, 1e9);
    EXPECT_EQ(f.visibility_clamped, f.visibility_raw);
}

TEST(FitFringe, ExactRecoveryFloatingPeriod) {
    const double period = 1550e-9;
    const auto t = sinusoid(200.0, 150.0, -2.0, period * 1.037, 4.0 * period, 300);
    const auto f = fit_fringe(t.x, t.y, {period, true, false});
    EXPECT_NEAR(f.period, period * 1.037, period * 1.037 * 1e-6);
    EXPECT_NEAR(f.offset, 200.0, 200.0 * 1e-6);
    EXPECT_NEAR(f.amplitude_fit, 150.0, 150.0 * 1e-6);
    EXPECT_NEAR(f.phase0, -2.0, 1e-5);
}

TEST(FitFringe, PeriodRefinementNeverIncreasesResidual) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto t = poisson_trace(300.0, 0.5, 1064e-9, 120, seed);
        const auto fixed = fit_fringe(t.x, t.y, {1064e-9, false, false});
        const auto floated = fit_fringe(t.x, t.y, {1064e-9, true, false});
        EXPECT_LE(floated.ss_res, fixed.ss_res);
        EXPECT_GE(floated.r_squared, fixed.r_squared);
    }
}

TEST(FitFringe, MonteCarloVisibility) {
    double sum = 0.0;
    constexpr int kSeeds = 100;
    for (int s = 0; s < kSeeds; ++s) {
        const auto t = poisson_trace(1500.0, 0.8, 3393e-9, 200, static_cast<std::uint64_t>(s));
        const auto f = fit_fringe(t.x, t.y, {3393e-9, false, false});
        EXPECT_NEAR(f.visibility_raw, 0.8, 0.03);
        sum += f.visibility_raw;
    }
    EXPECT_NEAR(sum / kSeeds, 0.8, 0.03);
}

TEST(FitFringe, WeightedFitAgreesOnCleanData) {
    const auto t = sinusoid(50.0, 20.0, 0.5, 1.0, 3.0, 90);
    const auto f = fit_fringe(t.x, t.y, {1.0, false, true});
    EXPECT_NEAR(f.visibility_raw, 0.4, 1e-9);
}

TEST(SnrFromR2, Examples) {
    EXPECT_DOUBLE_EQ(snr_from_r2(0.5), 1.0);
    EXPECT_EQ(snr_from_r2(0.0), 0.0);
    EXPECT_NEAR(snr_from_r2(0.9), 9.0, 1e-12);
    EXPECT_TRUE(std::isinf(snr_from_r2(1.0)));
    EXPECT_THROW(snr_from_r2(-0.1), PhysicsError);
    EXPECT_THROW(snr_from_r2(1.1), PhysicsError);
}

TEST(ClampVisibility, Examples) {
    FringeFit f;
    f.snr = 0.5;
    f.visibility_raw = 0.9;
    EXPECT_EQ(clamp_visibility(f), 0.0);
    f.snr = 9.0;
    f.visibility_raw = 0.6;
    EXPECT_EQ(clamp_visibility(f), 0.6);
    f.snr = 1.0;
    f.visibility_raw = 0.3;
    EXPECT_EQ(clamp_visibility(f), 0.3);
    f.snr = std::nextafter(1.0, 0.0);
    EXPECT_EQ(clamp_visibility(f), 0.0);
}

TEST(ClampVisibility, WeakFringesClampToExactlyZero) {
    // Lower the fringe contrast until noise dominates; every fit below SNR 1
    // must report exactly 0, every fit at or above it the raw value.
    int clamped = 0, kept = 0;
    for (int k = 0; k < 60; ++k) {
        const double vis = 0.005 * k;
        const auto t = poisson_trace(100.0, vis, 1.0, 120, static_cast<std::uint64_t>(k));
        const auto f = fit_fringe(t.x, t.y, {1.0, false, false});
        if (f.snr < 1.0) {
            EXPECT_EQ(f.visibility_clamped, 0.0);
            ++clamped;
        } else {
            EXPECT_EQ(f.visibility_clamped, f.visibility_raw);
            ++kept;
        }
    }
    EXPECT_GT(clamped, 0);
    EXPECT_GT(kept, 0);
}

TEST(FitFringe, ConstantTraceHasNoFringe) {
    const std::vector<double> x = linspace(0.0, 2.0, 40);
    const std::vector<double> y(40, 17.0);
    const auto f = fit_fringe(x, y, {1.0, true, false});
    EXPECT_EQ(f.r_squared, 0.0);
    EXPECT_EQ(f.snr, 0.0);
    EXPECT_EQ(f.visibility_raw, 0.0);
    EXPECT_EQ(f.visibility_clamped, 0.0);
    EXPECT_EQ(f.offset, 17.0);
}

TEST(FitFringe, Errors) {
    const std::vector<double> x5 = linspace(0.0, 2.0, 5);
    const std::vector<double> y5(5, 3.0);
    EXPECT_THROW(fit_fringe(x5, y5, {1.0, false, false}), FitError);
    const std::vector<double> x(10, 1.0);
    const std::vector<double> y(10, 3.0);
    EXPECT_THROW(fit_fringe(x, y, {1.0, false, false}), FitError);
    const auto short_span = sinusoid(10.0, 1.0, 0.0, 1.0, 0.5, 20);
    EXPECT_THROW(fit_fringe(short_span.x, short_span.y, {1.0, false, false}), FitError);
    const auto negative = sinusoid(-10.0, 1.0, 0.0, 1.0, 2.0, 20);
    EXPECT_THROW(fit_fringe(negative.x, negative.y, {1.0, false, false}), FitError);
    const auto ok = sinusoid(10.0, 1.0, 0.0, 1.0, 2.0, 20);
    EXPECT_THROW(fit_fringe(ok.x, ok.y, {0.0, false, false}), FitError);
    // FitError is a physics error for exit-code purposes.
    EXPECT_THROW(fit_fringe(x5, y5, {1.0, false, false}), PhysicsError);
}

} // namespace
