#pragma once

// Virtual optical bench: hardware transfer functions mapping waveplate angle,
// knife-blade positions and piezo displacements onto an InterferometerState,
// plus a seeded photon-counting detector.

#include "nlisim/errors.hpp"
#include "nlisim/model.hpp"
#include "nlisim/random.hpp"
#include "nlisim/units.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace nlisim {

/// Straight blade cutting a Gaussian beam. Lengths in millimeters.
/// The blade advances into the beam as `position` increases.
struct KnifeEdge {
    double position = -1.0;  ///< blade edge coordinate
    double center = 0.0;     ///< beam center
    double waist = 0.12;     ///< 1/e^2 intensity radius at the blade plane

    void validate() const { detail::require(waist > 0.0, "knife-edge waist must be > 0"); }
};

enum class Axis { pump, signal, idler };

inline std::string_view to_string(Axis a) {
    switch (a) {
    case Axis::pump: return "pump";
    case Axis::signal: return "signal";
    case Axis::idler: return "idler";
    }
    return "?";
}

inline Axis parse_axis(std::string_view name) {
    if (name == "pump") return Axis::pump;
    if (name == "signal") return Axis::signal;
    if (name == "idler") return Axis::idler;
    throw InputError("unknown piezo axis '" + std::string(name) + "' (expected pump, signal or idler)");
}

inline double axis_wavelength(Axis a, const WavelengthTriple& wl) {
    switch (a) {
    case Axis::pump: return wl.pump;
    case Axis::signal: return wl.signal;
    case Axis::idler: return wl.idler;
    }
    return wl.idler;
}

struct PiezoAxis {
    Axis which = Axis::idler;
    double delta_l = 0.0;  ///< mirror displacement, m
};

/// Calibrated description of the bench. Defaults reproduce the published
/// operating point: 1 mW at 1064 nm, 50 ms bins, ~80% SNSPD efficiency,
/// 0.01 Hz background and a 60% unexplained loss on the first idler beam.
struct BenchConfig {
    WavelengthTriple wavelengths = wavelengths_from(1064e-9, 1550e-9);
    GainLaw gain_law{0.1};
    double p_total = 1e-3;            ///< W
    double hwp_offset_deg = 22.5;     ///< angle sending all pump power to the second pass
    KnifeEdge knife_signal{};
    KnifeEdge knife_idler{};
    double fixed_loss_signal = 0.43;  ///< transmissivity, alignment and coating losses
    double fixed_loss_idler = 0.40;   ///< transmissivity; the extra 60% idler loss
    double pbs_extinction = 1e-3;     ///< pump leakage fraction between arms
    double background_rate = 0.01;    ///< counts/s
    double eta_detect = 0.8;
    double eta_probe = 0.30;
    double mode_flux = 9.0e8;         ///< photons/s per unit gain
    double dwell = 0.05;              ///< s

    static BenchConfig calibrated_default() { return {}; }

    /// Lossless, noiseless bench with unit efficiencies: the bare model.
    static BenchConfig ideal() {
        BenchConfig c;
        c.fixed_loss_signal = 1.0;
        c.fixed_loss_idler = 1.0;
        c.pbs_extinction = 0.0;
        c.background_rate = 0.0;
        c.eta_detect = 1.0;
        c.eta_probe = 1.0;
        return c;
    }

    RateModel rates() const { return {mode_flux, eta_detect, eta_probe}; }

    double balanced_angle_deg() const { return hwp_offset_deg + 22.5; }

    void validate() const {
        auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        wavelengths.validate();
        gain_law.validate();
        knife_signal.validate();
        knife_idler.validate();
        detail::require(p_total >= 0.0 && std::isfinite(p_total), "p_total must be >= 0");
        detail::require(std::isfinite(hwp_offset_deg), "hwp_offset_deg must be finite");
        detail::require(unit(fixed_loss_signal), "fixed_loss_signal must lie in [0,1]");
        detail::require(unit(fixed_loss_idler), "fixed_loss_idler must lie in [0,1]");
        detail::require(pbs_extinction >= 0.0 && pbs_extinction < 1.0, "pbs_extinction must lie in [0,1)");
        detail::require(background_rate >= 0.0, "background_rate must be >= 0");
        detail::require(unit(eta_detect), "eta_detect must lie in [0,1]");
        detail::require(unit(eta_probe), "eta_probe must lie in [0,1]");
        detail::require(mode_flux >= 0.0 && std::isfinite(mode_flux), "mode_flux must be >= 0");
        detail::require(dwell > 0.0, "dwell must be > 0");
    }
};

/// Fraction of pump power delivered to the first pass by the balance waveplate.
inline double hwp_split(double theta_deg, double theta0_deg) {
    const double s = std::sin(2.0 * deg_to_rad(theta_deg - theta0_deg));
    return s * s;
}

/// Smallest angle above theta0 at which hwp_split returns r_p.
inline double hwp_angle_for(double r_p, double theta0_deg) {
    detail::require(r_p >= 0.0 && r_p <= 1.0, "r_p must lie in [0,1]");
    return theta0_deg + 0.5 * rad_to_deg(std::asin(std::sqrt(r_p)));
}

/// Power fraction of a Gaussian beam passing the blade.
inline double knife_transmission(const KnifeEdge& k) {
    k.validate();
    return 0.5 * std::erfc(std::sqrt(2.0) * (k.position - k.center) / k.waist);
}

// One fringe per wavelength of mirror travel.
inline constexpr double kFringesPerWavelength = 1.0;

/// Contribution of a mirror displacement to phi = phi_p - phi_i - phi_s.
inline double piezo_phase(const PiezoAxis& axis, const WavelengthTriple& wl) {
    const double magnitude = kTwoPi * kFringesPerWavelength * axis.delta_l / axis_wavelength(axis.which, wl);
    return axis.which == Axis::pump ? magnitude : -magnitude;
}

inline double photon_energy(double lambda) {
    detail::require(lambda > 0.0, "wavelength must be > 0");
    return kPlanck * kSpeedOfLight / lambda;
}

/// Optical power (W) carried by `rate` photons/s at wavelength `lambda` (m).
inline double rate_to_power(double rate, double lambda) {
    detail::require(rate >= 0.0, "photon rate must be >= 0");
    return rate * photon_energy(lambda);
}

inline double power_to_rate(double power, double lambda) {
    detail::require(power >= 0.0, "optical power must be >= 0");
    return power / photon_energy(lambda);
}

struct PiezoSettings {
    double pump = 0.0;    ///< m
    double signal = 0.0;  ///< m
    double idler = 0.0;   ///< m

    double& operator[](Axis a) {
        switch (a) {
        case Axis::pump: return pump;
        case Axis::signal: return signal;
        case Axis::idler: return idler;
        }
        return idler;
    }
};

/// Actuator settings for one measurement. Unset blade positions fall back to
/// the config; overrides bypass the corresponding hardware stage entirely.
struct BenchSettings {
    std::optional<double> theta_deg;         ///< balance waveplate; default: balanced angle
    std::optional<double> knife_signal_mm;
    std::optional<double> knife_idler_mm;
    PiezoSettings piezo{};
    std::optional<double> r_p_override;      ///< delivered balance, no waveplate or PBS leakage
    std::optional<double> t_s_override;
    std::optional<double> t_i_override;
};

/// Pump powers reaching the two passes, after waveplate split and PBS leakage.
inline PumpPowers pump_powers(const BenchConfig& c, const BenchSettings& s) {
    if (s.r_p_override) return split_power({*s.r_p_override, c.p_total});
    const double theta = s.theta_deg.value_or(c.balanced_angle_deg());
    const auto [p_a, p_b] = split_power({hwp_split(theta, c.hwp_offset_deg), c.p_total});
    const double eps = c.pbs_extinction;
    if (eps == 0.0) return {p_a, p_b};
    return detail::exact_split(c.p_total, (1.0 - eps) * p_a + eps * p_b);
}

inline double signal_transmission(const BenchConfig& c, const BenchSettings& s) {
    if (s.t_s_override) return *s.t_s_override;
    KnifeEdge k = c.knife_signal;
    if (s.knife_signal_mm) k.position = *s.knife_signal_mm;
    return c.fixed_loss_signal * knife_transmission(k);
}

inline double idler_transmission(const BenchConfig& c, const BenchSettings& s) {
    if (s.t_i_override) return *s.t_i_override;
    KnifeEdge k = c.knife_idler;
    if (s.knife_idler_mm) k.position = *s.knife_idler_mm;
    return c.fixed_loss_idler * knife_transmission(k);
}

inline InterferometerState assemble_state(const BenchConfig& c, const BenchSettings& s = {}) {
    c.validate();
    const auto [p_a, p_b] = pump_powers(c, s);
    const auto& wl = c.wavelengths;
    InterferometerState state{
        signal_transmission(c, s),
        idler_transmission(c, s),
        gain_from_power(p_a, c.gain_law),
        gain_from_power(p_b, c.gain_law),
        piezo_phase({Axis::pump, s.piezo.pump}, wl) + piezo_phase({Axis::signal, s.piezo.signal}, wl) +
            piezo_phase({Axis::idler, s.piezo.idler}, wl),
    };
    state.validate();
    return state;
}

/// Mean counts in one dwell bin for a photon rate at the detector input.
inline double expected_counts(double mean_rate, const BenchConfig& c) {
    detail::require(mean_rate >= 0.0 && std::isfinite(mean_rate), "mean photon rate must be finite and >= 0");
    return c.dwell * (c.eta_detect * mean_rate + c.background_rate);
}

/// Poisson-distributed counts in one dwell bin. Same inputs and seed give the same count.
inline std::uint64_t detect(double mean_rate, const BenchConfig& c, std::uint64_t seed) {
    const double mean = expected_counts(mean_rate, c);
    if (mean <= 0.0) return 0;
    std::mt19937_64 rng(mix64(seed));
    std::poisson_distribution<std::uint64_t> counts(mean);
    return counts(rng);
}

} // namespace nlisim
