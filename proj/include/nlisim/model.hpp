#pragma once

// Closed-form physics of a folded (double-pass) non-degenerate nonlinear
// interferometer: detected signal photon number versus phase, fringe
// amplitude/visibility, detection-to-probe power ratio and the pump balance
// that restores unit visibility in the presence of internal loss.

#include "nlisim/errors.hpp"
#include "nlisim/units.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace nlisim {

/// Physical parameters consumed by the photon-number formula.
struct InterferometerState {
    double t_s = 1.0;  ///< transmissivity of the internal (first) signal path, [0,1]
    double t_i = 1.0;  ///< transmissivity of the internal (first) idler path, [0,1]
    double g_a = 0.0;  ///< gain of the first pass, >= 0
    double g_b = 0.0;  ///< gain of the second pass, >= 0
    double phi = 0.0;  ///< phi_p - phi_i - phi_s, radians

    void validate() const {
        detail::require(t_s >= 0.0 && t_s <= 1.0, "t_s must lie in [0,1], got " + std::to_string(t_s));
        detail::require(t_i >= 0.0 && t_i <= 1.0, "t_i must lie in [0,1], got " + std::to_string(t_i));
        detail::require(g_a >= 0.0 && std::isfinite(g_a), "g_a must be finite and >= 0");
        detail::require(g_b >= 0.0 && std::isfinite(g_b), "g_b must be finite and >= 0");
        detail::require(std::isfinite(phi), "phi must be finite");
    }
};

/// G = sinh^2(sqrt(kappa * P)).
struct GainLaw {
    double kappa = 1.0;  ///< 1/W

    void validate() const { detail::require(kappa > 0.0 && std::isfinite(kappa), "gain law kappa must be > 0"); }
};

struct PowerBalance {
    double r_p = 0.5;      ///< fraction of the pump sent to the first pass
    double p_total = 0.0;  ///< W

    void validate() const {
        detail::require(r_p >= 0.0 && r_p <= 1.0, "power balance r_p must lie in [0,1]");
        detail::require(p_total >= 0.0 && std::isfinite(p_total), "total pump power must be >= 0");
    }
};

struct PumpPowers {
    double p_a = 0.0;  ///< W, first pass
    double p_b = 0.0;  ///< W, second pass
};

/// Pump, signal and idler vacuum wavelengths in meters.
struct WavelengthTriple {
    double pump = 1064e-9;
    double signal = 1550e-9;
    double idler = 0.0;

    static constexpr double kEnergyTolerance = 1e-3;

    void validate() const {
        detail::require(pump > 0.0 && signal > 0.0 && idler > 0.0, "wavelengths must be > 0");
        const double lhs = 1.0 / pump;
        const double rhs = 1.0 / signal + 1.0 / idler;
        detail::require(std::abs(lhs - rhs) <= kEnergyTolerance * lhs,
                        "wavelengths violate energy conservation 1/lp = 1/ls + 1/li");
    }
};

/// Converts dimensionless gains into photon rates.
struct RateModel {
    double mode_flux = 1.0;   ///< photons/s per unit gain
    double eta_detect = 1.0;  ///< crystal -> detector (including detector QE)
    double eta_probe = 1.0;   ///< crystal -> sample

    void validate() const {
        detail::require(mode_flux >= 0.0 && std::isfinite(mode_flux), "mode_flux must be >= 0");
        detail::require(eta_detect >= 0.0 && eta_detect <= 1.0, "eta_detect must lie in [0,1]");
        detail::require(eta_probe >= 0.0 && eta_probe <= 1.0, "eta_probe must lie in [0,1]");
    }
};

/// Which detected photon number enters the detection-to-probe ratio.
enum class DetectedEstimate {
    phase_average,  ///< interference term averaged out (default)
    fringe_peak,    ///< N at phi_max = pi
};

inline double gain_from_power(double power, const GainLaw& law) {
    detail::require(power >= 0.0 && std::isfinite(power), "pump power must be finite and >= 0");
    law.validate();
    const double s = std::sinh(std::sqrt(law.kappa * power));
    return s * s;
}

namespace detail {

// Splits p_total into (p_total - b, b) with b = p_total - p_a. Whichever arm is
// the larger, one of the two subtractions is exact (Sterbenz), so the
// returned pair sums to p_total with no rounding error.
inline PumpPowers exact_split(double p_total, double p_a) {
    const double p_b = p_total - p_a;
    return {p_total - p_b, p_b};
}

} // namespace detail

inline PumpPowers split_power(const PowerBalance& balance) {
    balance.validate();
    return detail::exact_split(balance.p_total, balance.r_p * balance.p_total);
}

namespace detail {

// The two non-interfering contributions; their geometric mean sets the
// interference term: x = T_s G_A (1 + G_B), y = T_i G_B (1 + G_A).
struct ArmWeights {
    double x;
    double y;
};

inline ArmWeights arm_weights(const InterferometerState& s) {
    return {s.t_s * s.g_a * (1.0 + s.g_b), s.t_i * s.g_b * (1.0 + s.g_a)};
}

} // namespace detail

/// Mean photon number at the signal detector for the given phase.
inline double photon_number(const InterferometerState& s) {
    s.validate();
    const double incoherent = s.t_s * s.g_a + s.t_i * s.g_b + (s.t_s + s.t_i) * s.g_a * s.g_b;
    const double coherent =
        2.0 * std::sqrt(s.t_s * s.t_i * s.g_a * s.g_b * (1.0 + s.g_a) * (1.0 + s.g_b));
    return incoherent - coherent * std::cos(s.phi);
}

/// N(phi = 0..2pi) averaged over phase: the interference term drops out.
inline double mean_photon_number(const InterferometerState& s) {
    s.validate();
    return s.t_s * s.g_a + s.t_i * s.g_b + (s.t_s + s.t_i) * s.g_a * s.g_b;
}

/// Peak-to-trough photon number difference N(pi) - N(0). Ignores s.phi.
inline double fringe_amplitude(const InterferometerState& s) {
    s.validate();
    const auto w = detail::arm_weights(s);
    return 4.0 * std::sqrt(w.x * w.y);
}

/// Fringe visibility A / (N_max + N_min). Ignores s.phi.
inline double visibility(const InterferometerState& s) {
    s.validate();
    const auto w = detail::arm_weights(s);
    const double sum = w.x + w.y;
    if (!(sum > 0.0))
        throw PhysicsError("visibility undefined: no photons reach the detector (all gains or transmissivities zero)");
    const double v = 2.0 * std::sqrt(w.x * w.y) / sum;
    return v > 1.0 ? 1.0 : v;
}

/// Pump balance r_p in (0,1) at which visibility is unity, found by bisection
/// on T_s G_A (1+G_B) - T_i G_B (1+G_A), which increases monotonically in r_p.
inline double optimal_balance(double t_s, double t_i, double p_total, const GainLaw& law) {
    detail::require(t_s > 0.0 && t_i > 0.0, "no optimal balance: an internal arm is fully blocked");
    detail::require(t_s <= 1.0 && t_i <= 1.0, "transmissivities must lie in [0,1]");
    detail::require(p_total > 0.0 && std::isfinite(p_total), "total pump power must be > 0");
    law.validate();

    constexpr int kMaxIterations = 200;
    // Relative to x + y; far tighter than the 1e-9 visibility target.
    constexpr double kResidualTolerance = 1e-15;

    auto residual = [&](double r_p) {
        const auto [p_a, p_b] = split_power({r_p, p_total});
        const InterferometerState s{t_s, t_i, gain_from_power(p_a, law), gain_from_power(p_b, law), 0.0};
        const auto w = detail::arm_weights(s);
        return std::pair{w.x - w.y, w.x + w.y};
    };

    double lo = 0.0;
    double hi = 1.0;
    double mid = 0.5;
    for (int it = 0; it < kMaxIterations; ++it) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const auto [f, scale] = residual(mid);
        if (f == 0.0) break;
        if (std::abs(f) <= kResidualTolerance * scale) break;
        if (f < 0.0) lo = mid; else hi = mid;
    }
    return mid;
}

/// Detected-to-probe optical power ratio (N_d lambda_i) / (N_s lambda_s).
/// N_d = eta_detect * N (phase averaged by default), N_s = eta_probe * G_A.
inline double detection_probe_ratio(const InterferometerState& s,
                                    const WavelengthTriple& wl,
                                    const RateModel& rates,
                                    DetectedEstimate estimate = DetectedEstimate::phase_average) {
    s.validate();
    rates.validate();
    detail::require(wl.signal > 0.0 && wl.idler > 0.0, "wavelengths must be > 0");
    const double probe = rates.mode_flux * rates.eta_probe * s.g_a;
    if (!(probe > 0.0))
        throw PhysicsError("detection-to-probe ratio is infinite: no first-pass idler photons reach the sample");
    double n_det = 0.0;
    if (estimate == DetectedEstimate::phase_average) {
        n_det = mean_photon_number(s);
    } else {
        InterferometerState peak = s;
        peak.phi = kPi;
        n_det = photon_number(peak);
    }
    const double detected = rates.mode_flux * rates.eta_detect * n_det;
    return (detected * wl.idler) / (probe * wl.signal);
}

/// Idler wavelength from energy conservation 1/li = 1/lp - 1/ls.
inline double idler_wavelength(double lambda_p, double lambda_s) {
    detail::require(lambda_p > 0.0, "pump wavelength must be > 0");
    detail::require(lambda_s > lambda_p, "signal wavelength must exceed the pump wavelength");
    return 1.0 / (1.0 / lambda_p - 1.0 / lambda_s);
}

inline WavelengthTriple wavelengths_from(double lambda_p, double lambda_s) {
    return {lambda_p, lambda_s, idler_wavelength(lambda_p, lambda_s)};
}

} // namespace nlisim
