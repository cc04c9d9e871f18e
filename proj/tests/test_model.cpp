#include "nlisim/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using namespace nlisim;

// Direct term-by-term evaluation of the photon-number formula, kept apart from
// the library so the two can disagree.
double photon_number_oracle(double ts, double ti, double ga, double gb, double phi) {
    const double a = ts * ga;
    const double b = ti * gb;
    const double c = (ts + ti) * ga * gb;
    const double interference = 2.0 * std::sqrt(ts * ti * (1.0 + ga) * (1.0 + gb) * ga * gb) * std::cos(phi);
    return a + b + c - interference;
}

struct StateSampler {
    std::mt19937_64 rng{20240601};
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    std::uniform_real_distribution<double> log_gain{-8.0, 1.0};
    std::uniform_real_distribution<double> phase{-10.0, 10.0};

    InterferometerState operator()() {
        return {unit(rng), unit(rng), std::pow(10.0, log_gain(rng)), std::pow(10.0, log_gain(rng)), phase(rng)};
    }
};

TEST(GainFromPower, ZeroPowerGivesZeroGain) {
    EXPECT_EQ(gain_from_power(0.0, GainLaw{3.7}), 0.0);
}

TEST(GainFromPower, UnitArgument) {
    // sinh^2(1), evaluated at 30 digits offline.
    EXPECT_NEAR(gain_from_power(1.0, GainLaw{1.0}), 1.38109784554181572978, 1e-14);
    EXPECT_NEAR(gain_from_power(0.25, GainLaw{4.0}), 1.38109784554181572978, 1e-14);
}

TEST(GainFromPower, SmallArgumentIsLinear) {
    const double g = gain_from_power(1e-6, GainLaw{1.0});
    EXPECT_LT(std::abs(g - 1e-6) / 1e-6, 1e-6);
}

TEST(GainFromPower, MonotoneAndRejectsNegativePower) {
    double prev = -1.0;
    for (double p = 0.0; p < 5.0; p += 0.01) {
        const double g = gain_from_power(p, GainLaw{0.7});
        EXPECT_GT(g, prev);
        prev = g;
    }
    EXPECT_THROW(gain_from_power(-1e-9, GainLaw{1.0}), PhysicsError);
    EXPECT_THROW(gain_from_power(1.0, GainLaw{0.0}), PhysicsError);
}

TEST(SplitPower, Examples) {
    auto [a, b] = split_power({0.5, 1e-3});
    EXPECT_DOUBLE_EQ(a, 0.5e-3);
    EXPECT_DOUBLE_EQ(b, 0.5e-3);
    const auto low = split_power({0.01, 1e-3});
    // The exact-sum split may move p_a by up to half an ulp of p_total.
    const double half_ulp = 0.5 * (std::nextafter(1e-3, 1.0) - 1e-3);
    EXPECT_NEAR(low.p_a, 10e-6, half_ulp);
    EXPECT_NEAR(low.p_b, 990e-6, half_ulp);
    const auto all = split_power({1.0, 1e-3});
    EXPECT_EQ(all.p_a, 1e-3);
    EXPECT_EQ(all.p_b, 0.0);
    EXPECT_THROW(split_power({1.5, 1e-3}), PhysicsError);
    EXPECT_THROW(split_power({0.5, -1.0}), PhysicsError);
}

TEST(SplitPower, ArmsSumExactly) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100000; ++k) {
        const double p = std::pow(10.0, -6.0 + 6.0 * u(rng));
        const auto [a, b] = split_power({u(rng), p});
        ASSERT_EQ(a + b, p);
    }
}

TEST(PhotonNumber, NoFirstPassLeavesOnlySecondPass) {
    for (double phi : {0.0, 0.7, kPi, 5.0}) {
        EXPECT_DOUBLE_EQ(photon_number({0.6, 0.8, 0.0, 0.3, phi}), 0.8 * 0.3);
    }
}

TEST(PhotonNumber, PerfectDestructiveInterference) {
    for (double g : {1e-6, 1e-2, 1.0, 30.0}) {
        EXPECT_NEAR(photon_number({1.0, 1.0, g, g, 0.0}), 0.0, 1e-12 * (1.0 + g * g));
    }
}

TEST(PhotonNumber, MatchesIndependentEvaluation) {
    // Frozen from a 30-digit evaluation: t_s = 0.5, t_i = 1, g = 0.01, phi = pi.
    EXPECT_NEAR(photon_number({0.5, 1.0, 0.01, 0.01, kPi}), 0.02943355697996825999, 1e-15);
    StateSampler sample;
    for (int k = 0; k < 2000; ++k) {
        const auto s = sample();
        const double ref = photon_number_oracle(s.t_s, s.t_i, s.g_a, s.g_b, s.phi);
        EXPECT_NEAR(photon_number(s), ref, 1e-12 * (1.0 + std::abs(ref)));
    }
}

TEST(PhotonNumber, RejectsInvalidState) {
    EXPECT_THROW(photon_number({1.2, 1.0, 0.1, 0.1, 0.0}), PhysicsError);
    EXPECT_THROW(photon_number({1.0, -0.1, 0.1, 0.1, 0.0}), PhysicsError);
    EXPECT_THROW(photon_number({1.0, 1.0, -0.1, 0.1, 0.0}), PhysicsError);
    EXPECT_THROW(photon_number({1.0, 1.0, 0.1, 0.1, NAN}), PhysicsError);
}

TEST(FringeAmplitude, Examples) {
    EXPECT_EQ(fringe_amplitude({0.7, 0.9, 0.0, 0.5}), 0.0);
    EXPECT_NEAR(fringe_amplitude({1.0, 1.0, 0.01, 0.01}), 0.0404, 1e-15);
    EXPECT_EQ(fringe_amplitude({0.0, 0.9, 0.2, 0.5}), 0.0);
}

TEST(Visibility, Examples) {
    for (double g : {1e-5, 0.1, 3.0}) EXPECT_NEAR(visibility({1.0, 1.0, g, g}), 1.0, 1e-15);
    EXPECT_NEAR(visibility({0.25, 1.0, 1e-4, 1e-4}), 0.8, 0.8e-3);
    EXPECT_EQ(visibility({0.5, 0.5, 0.0, 0.2}), 0.0);
}

TEST(Visibility, AllGainsZeroIsAnError) {
    EXPECT_THROW(visibility({1.0, 1.0, 0.0, 0.0}), PhysicsError);
    EXPECT_THROW(visibility({0.0, 0.0, 0.1, 0.1}), PhysicsError);
}

TEST(ModelProperties, NonNegativityAndVisibilityBound) {
    StateSampler sample;
    for (int k = 0; k < 100000; ++k) {
        const auto s = sample();
        ASSERT_GE(photon_number(s), -1e-12) << k;
        const double v = visibility(s);
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
    }
}

TEST(ModelProperties, SwapSymmetry) {
    StateSampler sample;
    for (int k = 0; k < 10000; ++k) {
        const auto s = sample();
        const InterferometerState swapped{s.t_i, s.t_s, s.g_b, s.g_a, s.phi};
        ASSERT_EQ(visibility(s), visibility(swapped));
        ASSERT_EQ(fringe_amplitude(s), fringe_amplitude(swapped));
    }
}

TEST(ModelProperties, UnitVisibilityAtBalanceCondition) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double ts = u(rng), ti = u(rng), gb = 1e-3 * u(rng);
        // Closed form of g_a from T_s g_a (1 + g_b) = T_i g_b (1 + g_a).
        const double denom = ts * (1.0 + gb) - ti * gb;
        const double ga = ti * gb / denom;
        if (ga <= 0.0) continue;
        EXPECT_NEAR(visibility({ts, ti, ga, gb}), 1.0, 1e-9);
        // Off the condition the visibility must be strictly below 1.
        EXPECT_LT(visibility({ts, ti, 2.0 * ga, gb}), 1.0 - 1e-6);
    }
}

TEST(ModelProperties, ExtremumAtPiMatchesAmplitude) {
    StateSampler sample;
    for (int k = 0; k < 20; ++k) {
        auto s = sample();
        double best = -1.0, best_phi = 0.0, worst = 1e300;
        for (int n = 0; n < 10000; ++n) {
            s.phi = kTwoPi * n / 10000.0;
            const double v = photon_number(s);
            if (v > best) { best = v; best_phi = s.phi; }
            worst = std::min(worst, v);
        }
        EXPECT_NEAR(best_phi, kPi, kTwoPi / 10000.0);
        const double amp = fringe_amplitude(s);
        EXPECT_NEAR(best - worst, amp, 1e-6 * amp);
    }
}

TEST(OptimalBalance, SymmetricConfigurationIsBalanced) {
    EXPECT_NEAR(optimal_balance(1.0, 1.0, 1e-3, GainLaw{1.0}), 0.5, 1e-12);
    EXPECT_NEAR(optimal_balance(1.0, 1.0, 2.0, GainLaw{1.0}), 0.5, 1e-12);
}

TEST(OptimalBalance, LowGainAnalyticSolution) {
    // Low gain: G ~ kappa P, so T_s P_A = T_i P_B  =>  r_p = T_i / (T_s + T_i).
    const GainLaw law{1e-3};
    EXPECT_NEAR(optimal_balance(0.25, 1.0, 1e-6, law), 0.8, 1e-8);
    EXPECT_NEAR(optimal_balance(1.0, 0.25, 1e-6, law), 0.2, 1e-8);
    const double r = optimal_balance(0.3, 0.9, 2.0, GainLaw{0.5});
    const auto [pa, pb] = split_power({r, 2.0});
    EXPECT_NEAR(visibility({0.3, 0.9, gain_from_power(pa, GainLaw{0.5}), gain_from_power(pb, GainLaw{0.5})}), 1.0, 1e-9);
}

TEST(OptimalBalance, BlockedArmHasNoOptimum) {
    EXPECT_THROW(optimal_balance(0.0, 1.0, 1e-3, GainLaw{1.0}), PhysicsError);
    EXPECT_THROW(optimal_balance(1.0, 0.0, 1e-3, GainLaw{1.0}), PhysicsError);
    EXPECT_THROW(optimal_balance(1.0, 1.0, 0.0, GainLaw{1.0}), PhysicsError);
}

TEST(OptimalBalance, CompensationMonotonicity) {
    const GainLaw law{0.1};
    double prev = 0.0;
    for (double ts = 1.0; ts >= 0.1 - 1e-12; ts -= 0.05) {
        const double r = optimal_balance(ts, 1.0, 1e-3, law);
        EXPECT_GT(r, prev) << "t_s = " << ts;
        prev = r;
    }
}

TEST(OptimalBalance, VisibilityCompensationCostsAmplitude) {
    const GainLaw law{1.0};
    const double p = 0.5;
    auto amp = [&](double ts, double r) {
        const auto [pa, pb] = split_power({r, p});
        return fringe_amplitude({ts, 1.0, gain_from_power(pa, law), gain_from_power(pb, law)});
    };
    for (double ts : {0.8, 0.5, 0.2}) {
        const double r_star = optimal_balance(ts, 1.0, p, law);
        double best = 0.0;
        for (int k = 0; k <= 1000; ++k) best = std::max(best, amp(ts, k / 1000.0));
        EXPECT_LT(amp(ts, r_star), best) << "t_s = " << ts;
    }
}

TEST(DetectionProbeRatio, BalancedLowGain) {
    const WavelengthTriple wl = wavelengths_from(1064e-9, 1550e-9);
    const RateModel unit{1.0, 1.0, 1.0};
    // 30-digit reference for g = 1e-6: (2g + 2g^2) li / (g ls).
    EXPECT_NEAR(detection_probe_ratio({1.0, 1.0, 1e-6, 1e-6}, wl, unit), 4.37860520164609053, 1e-12);
    const WavelengthTriple degenerate{775e-9, 1550e-9, 1550e-9};
    EXPECT_NEAR(detection_probe_ratio({1.0, 1.0, 1e-9, 1e-9}, degenerate, unit), 2.0, 1e-8);
}

TEST(DetectionProbeRatio, FringePeakOptionAndErrors) {
    const WavelengthTriple wl = wavelengths_from(1064e-9, 1550e-9);
    const InterferometerState s{0.5, 0.7, 1e-3, 2e-3};
    const RateModel r{1.0, 0.8, 0.3};
    EXPECT_GT(detection_probe_ratio(s, wl, r, DetectedEstimate::fringe_peak), detection_probe_ratio(s, wl, r));
    EXPECT_THROW(detection_probe_ratio({0.5, 0.7, 0.0, 1e-3}, wl, r), PhysicsError);
    EXPECT_THROW(detection_probe_ratio(s, wl, RateModel{1.0, 0.8, 0.0}), PhysicsError);
}

TEST(DetectionProbeRatio, ModeFluxCancels) {
    const WavelengthTriple wl = wavelengths_from(1064e-9, 1550e-9);
    StateSampler sample;
    for (int k = 0; k < 1000; ++k) {
        const auto s = sample();
        const double base = detection_probe_ratio(s, wl, {1.0, 0.8, 0.3});
        for (double flux : {1e-3, 7.0, 9e8}) {
            EXPECT_NEAR(detection_probe_ratio(s, wl, {flux, 0.8, 0.3}), base, 1e-12 * base);
        }
    }
}

TEST(IdlerWavelength, Examples) {
    EXPECT_NEAR(idler_wavelength(1064e-9, 1550e-9), 3390e-9, 0.005 * 3390e-9);
    EXPECT_NEAR(idler_wavelength(1000e-9, 2000e-9), 2000e-9, 1e-20);
    EXPECT_NEAR(idler_wavelength(1064e-9, 2128e-9), 2128e-9, 1e-20);
    EXPECT_THROW(idler_wavelength(1550e-9, 1064e-9), PhysicsError);
    EXPECT_THROW(idler_wavelength(1064e-9, 1064e-9), PhysicsError);
}

TEST(WavelengthTriple, EnergyConservationIsChecked) {
    EXPECT_NO_THROW(wavelengths_from(1064e-9, 1550e-9).validate());
    EXPECT_NO_THROW((WavelengthTriple{1064e-9, 1550e-9, 3390e-9}.validate()));
    EXPECT_THROW((WavelengthTriple{1064e-9, 1550e-9, 3000e-9}.validate()), PhysicsError);
}

} // namespace
