#pragma once

// Piezo fringe scans: step one mirror, evaluate the assembled interferometer
// at each position and record photon counts.

#include "nlisim/bench.hpp"
#include "nlisim/config_io.hpp"
#include "nlisim/errors.hpp"
#include "nlisim/random.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nlisim {

enum class NoiseMode {
    poisson,   ///< shot-noise counts from detect()
    expected,  ///< noiseless: the exact mean counts per bin
};

inline std::string_view to_string(NoiseMode m) { return m == NoiseMode::poisson ? "poisson" : "expected"; }

inline NoiseMode parse_noise_mode(std::string_view s) {
    if (s == "poisson") return NoiseMode::poisson;
    if (s == "expected" || s == "none") return NoiseMode::expected;
    throw InputError("unknown noise mode '" + std::string(s) + "' (expected poisson or expected)");
}

struct ScanPlan {
    Axis axis = Axis::idler;
    double start = 0.0;  ///< m
    double stop = 0.0;   ///< m
    int steps = 200;
    std::optional<double> dwell;  ///< s; defaults to the config dwell
    std::uint64_t seed = 0;
    BenchSettings settings{};     ///< frozen bench settings; the scanned axis is offset per step
    NoiseMode noise = NoiseMode::poisson;

    void validate() const {
        if (steps < 2) throw InputError("scan needs at least 2 steps");
        if (!(stop > start)) throw InputError("scan stop must exceed start");
        if (dwell && !(*dwell > 0.0)) throw InputError("scan dwell must be > 0");
    }
};

/// One scan trace. Synthetic records carry the expected rate; lab traces may not.
struct ScanRecord {
    ScanPlan plan{};
    std::vector<double> position;       ///< m
    std::vector<double> expected_rate;  ///< photons/s at the detector input; empty for lab data
    std::vector<double> counts;         ///< counts per bin (integral unless noiseless)
    std::string config_hash;
    std::string created;                ///< ISO-8601 UTC, informational only

    std::size_t size() const { return position.size(); }
    bool has_expected_rate() const { return !expected_rate.empty(); }
};

/// Endpoint-inclusive uniform grid.
inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    // Each half is measured from its own endpoint so that reversed grids mirror
    // exactly (lo + hi - v[k] == v[n-1-k] whenever the arithmetic is exact).
    const double span = hi - lo;
    for (int k = 0; k < n; ++k) {
        const double frac = static_cast<double>(k) / (n - 1);
        v[k] = 2 * k < n ? lo + span * frac : hi - span * (static_cast<double>(n - 1 - k) / (n - 1));
    }
    return v;
}

/// Scan range covering `n_periods` fringes of the given axis, starting at 0.
inline std::pair<double, double> scan_range_for_periods(Axis axis, double n_periods, const WavelengthTriple& wl) {
    if (!(n_periods > 0.0)) throw InputError("number of periods must be > 0");
    return {0.0, n_periods * axis_wavelength(axis, wl)};
}

inline ScanRecord run_scan(const ScanPlan& plan, const BenchConfig& config) {
    plan.validate();
    config.validate();
    BenchConfig c = config;
    if (plan.dwell) c.dwell = *plan.dwell;

    ScanRecord rec;
    rec.plan = plan;
    rec.plan.dwell = c.dwell;
    rec.config_hash = config_hash(config);
    rec.position = linspace(plan.start, plan.stop, plan.steps);
    rec.expected_rate.resize(rec.position.size());
    rec.counts.resize(rec.position.size());

    for (std::size_t k = 0; k < rec.position.size(); ++k) {
        BenchSettings s = plan.settings;
        s.piezo[plan.axis] += rec.position[k];
        const double rate = c.mode_flux * photon_number(assemble_state(c, s));
        rec.expected_rate[k] = rate;
        rec.counts[k] = plan.noise == NoiseMode::poisson
                            ? static_cast<double>(detect(rate, c, step_seed(plan.seed, k)))
                            : expected_counts(rate, c);
    }
    return rec;
}

} // namespace nlisim
