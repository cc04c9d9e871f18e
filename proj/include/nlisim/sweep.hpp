#pragma once

// Balance x loss parameter maps.
//
// theory mode evaluates the closed-form visibility / amplitude / R_dp per
// cell; experiment mode simulates an idler-axis fringe scan per cell, fits it
// and applies SNR clamping. Cells are independent and addressed by index, so
// the result does not depend on the number of workers.

#include "nlisim/analysis.hpp"
#include "nlisim/bench.hpp"
#include "nlisim/config_io.hpp"
#include "nlisim/errors.hpp"
#include "nlisim/model.hpp"
#include "nlisim/random.hpp"
#include "nlisim/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

namespace nlisim {

enum class XAxis { r_p, theta_deg };
enum class YAxis { t_s, t_i, knife_signal_mm, knife_idler_mm };
enum class MapMode { theory, experiment };

inline std::string_view to_string(XAxis a) { return a == XAxis::r_p ? "rp" : "theta"; }

inline std::string_view to_string(YAxis a) {
    switch (a) {
    case YAxis::t_s: return "ts";
    case YAxis::t_i: return "ti";
    case YAxis::knife_signal_mm: return "knife-signal";
    case YAxis::knife_idler_mm: return "knife-idler";
    }
    return "?";
}

inline std::string_view to_string(MapMode m) { return m == MapMode::theory ? "theory" : "experiment"; }

inline XAxis parse_x_axis(std::string_view s) {
    if (s == "rp" || s == "r_p") return XAxis::r_p;
    if (s == "theta" || s == "hwp") return XAxis::theta_deg;
    throw InputError("unknown x axis '" + std::string(s) + "' (expected rp or theta)");
}

inline YAxis parse_y_axis(std::string_view s) {
    if (s == "ts" || s == "t_s") return YAxis::t_s;
    if (s == "ti" || s == "t_i") return YAxis::t_i;
    if (s == "knife-signal" || s == "knife_signal") return YAxis::knife_signal_mm;
    if (s == "knife-idler" || s == "knife_idler") return YAxis::knife_idler_mm;
    throw InputError("unknown y axis '" + std::string(s) + "' (expected ts, ti, knife-signal or knife-idler)");
}

inline MapMode parse_map_mode(std::string_view s) {
    if (s == "theory") return MapMode::theory;
    if (s == "experiment") return MapMode::experiment;
    throw InputError("unknown map mode '" + std::string(s) + "' (expected theory or experiment)");
}

struct AxisRange {
    double lo = 0.0;
    double hi = 1.0;
    int points = 2;
};

/// Per-cell scan used in experiment mode.
struct ExperimentScan {
    int steps = 120;
    double periods = 2.0;
    NoiseMode noise = NoiseMode::poisson;
    bool fit_period = false;
};

struct GridSpec {
    XAxis x = XAxis::r_p;
    AxisRange x_range{0.0, 1.0, 100};
    YAxis y = YAxis::t_s;
    AxisRange y_range{0.0, 1.0, 50};
    MapMode mode = MapMode::theory;
    BenchConfig config{};
    std::uint64_t seed = 0;
    ExperimentScan scan{};

    void validate() const {
        if (x_range.points < 2 || y_range.points < 2) throw InputError("map axes need at least 2 points");
        if (!(x_range.hi > x_range.lo) || !(y_range.hi > y_range.lo)) throw InputError("map axis ranges must be increasing");
        if (x == XAxis::r_p && (x_range.lo < 0.0 || x_range.hi > 1.0)) throw InputError("r_p axis must lie within [0,1]");
        if ((y == YAxis::t_s || y == YAxis::t_i) && (y_range.lo < 0.0 || y_range.hi > 1.0))
            throw InputError("transmissivity axis must lie within [0,1]");
        if (mode == MapMode::experiment && (scan.steps < static_cast<int>(kMinFitPoints) || !(scan.periods >= 1.0)))
            throw InputError("experiment scans need >= 6 steps over >= 1 period");
        config.validate();
    }
};

struct MapCell {
    double x = 0.0;
    double y = 0.0;
    double visibility = 0.0;      ///< clamped in experiment mode
    double visibility_raw = 0.0;
    double amplitude = 0.0;       ///< theory: per watt of pump; experiment: counts per bin, peak-to-trough
    double r_dp = 0.0;            ///< +inf when no first-pass idler
    double snr = std::numeric_limits<double>::infinity();
    double r_squared = 1.0;
    bool ok = true;               ///< false: visibility could not be evaluated
    std::string flag;             ///< empty, or the reason a quantity is degenerate
    std::optional<FringeFit> fit;
};

struct ParamMap {
    GridSpec grid{};
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<MapCell> cells;  ///< row-major: cells[j * xs.size() + i]
    std::string config_hash;
    std::uint64_t seed = 0;

    std::size_t nx() const { return xs.size(); }
    std::size_t ny() const { return ys.size(); }
    const MapCell& at(std::size_t i, std::size_t j) const { return cells[j * xs.size() + i]; }
    MapCell& at(std::size_t i, std::size_t j) { return cells[j * xs.size() + i]; }
};

/// Runs fn(k) for k in [0, n) on up to `workers` threads.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < n && !failed; k = next++) {
                    try {
                        fn(k);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

inline BenchSettings settings_for_cell(const GridSpec& g, double x, double y) {
    BenchSettings s;
    if (g.x == XAxis::r_p) s.r_p_override = x; else s.theta_deg = x;
    switch (g.y) {
    case YAxis::t_s: s.t_s_override = y; break;
    case YAxis::t_i: s.t_i_override = y; break;
    case YAxis::knife_signal_mm: s.knife_signal_mm = y; break;
    case YAxis::knife_idler_mm: s.knife_idler_mm = y; break;
    }
    return s;
}

namespace detail {

inline void add_flag(MapCell& cell, std::string_view what) {
    if (!cell.flag.empty()) cell.flag += "; ";
    cell.flag += what;
}

inline void fill_rdp(MapCell& cell, const InterferometerState& state, const BenchConfig& c) {
    try {
        cell.r_dp = detection_probe_ratio(state, c.wavelengths, c.rates());
    } catch (const PhysicsError&) {
        cell.r_dp = std::numeric_limits<double>::infinity();
        add_flag(cell, "r_dp infinite");
    }
}

inline ParamMap empty_map(const GridSpec& g) {
    g.validate();
    ParamMap map;
    map.grid = g;
    map.xs = linspace(g.x_range.lo, g.x_range.hi, g.x_range.points);
    map.ys = linspace(g.y_range.lo, g.y_range.hi, g.y_range.points);
    map.cells.resize(map.xs.size() * map.ys.size());
    map.config_hash = config_hash(g.config);
    map.seed = g.seed;
    return map;
}

} // namespace detail

inline MapCell theory_cell(const GridSpec& g, double x, double y) {
    MapCell cell;
    cell.x = x;
    cell.y = y;
    const auto state = assemble_state(g.config, settings_for_cell(g, x, y));
    try {
        cell.visibility = visibility(state);
        cell.visibility_raw = cell.visibility;
    } catch (const PhysicsError&) {
        cell.ok = false;
        cell.visibility = cell.visibility_raw = 0.0;
        detail::add_flag(cell, "visibility undefined");
    }
    cell.amplitude = g.config.p_total > 0.0 ? fringe_amplitude(state) / g.config.p_total : 0.0;
    detail::fill_rdp(cell, state, g.config);
    return cell;
}

inline ParamMap theory_map(const GridSpec& grid, unsigned workers = 1) {
    if (grid.mode != MapMode::theory) throw InputError("theory_map requires mode = theory");
    ParamMap map = detail::empty_map(grid);
    parallel_for(map.cells.size(), workers, [&](std::size_t k) {
        const std::size_t i = k % map.nx(), j = k / map.nx();
        map.cells[k] = theory_cell(map.grid, map.xs[i], map.ys[j]);
    });
    return map;
}

inline MapCell experiment_cell(const GridSpec& g, double x, double y, std::uint64_t seed) {
    MapCell cell;
    cell.x = x;
    cell.y = y;
    const BenchSettings settings = settings_for_cell(g, x, y);
    detail::fill_rdp(cell, assemble_state(g.config, settings), g.config);

    ScanPlan plan;
    plan.axis = Axis::idler;
    std::tie(plan.start, plan.stop) = scan_range_for_periods(Axis::idler, g.scan.periods, g.config.wavelengths);
    plan.steps = g.scan.steps;
    plan.seed = seed;
    plan.settings = settings;
    plan.noise = g.scan.noise;
    const auto record = run_scan(plan, g.config);
    try {
        const auto fit = fit_fringe(record, {g.config.wavelengths.idler, g.scan.fit_period, false});
        // Shot noise can push a fitted visibility past 1; the map stays in [0,1].
        cell.visibility = std::min(fit.visibility_clamped, 1.0);
        cell.visibility_raw = fit.visibility_raw;
        cell.amplitude = fit.amplitude_pp;
        cell.snr = fit.snr;
        cell.r_squared = fit.r_squared;
        cell.fit = fit;
    } catch (const FitError& e) {
        cell.ok = false;
        cell.visibility = cell.visibility_raw = cell.amplitude = 0.0;
        cell.snr = 0.0;
        cell.r_squared = 0.0;
        detail::add_flag(cell, std::string("fit failed: ") + e.what());
    }
    return cell;
}

inline ParamMap experiment_map(const GridSpec& grid, unsigned workers = 1) {
    if (grid.mode != MapMode::experiment) throw InputError("experiment_map requires mode = experiment");
    ParamMap map = detail::empty_map(grid);
    parallel_for(map.cells.size(), workers, [&](std::size_t k) {
        const std::size_t i = k % map.nx(), j = k / map.nx();
        map.cells[k] = experiment_cell(map.grid, map.xs[i], map.ys[j], cell_seed(map.grid.seed, i, j));
    });
    return map;
}

inline ParamMap compute_map(const GridSpec& grid, unsigned workers = 1) {
    return grid.mode == MapMode::theory ? theory_map(grid, workers) : experiment_map(grid, workers);
}

struct RdpRow {
    double theta_deg = 0.0;
    double r_p = 0.0;             ///< waveplate split before PBS leakage
    double visibility = 0.0;
    double r_dp = 0.0;
    bool ok = true;
    std::string flag;
};

/// Closed-form visibility and detection-to-probe ratio versus waveplate angle.
inline std::vector<RdpRow> rdp_profile(const std::vector<double>& thetas_deg, const BenchConfig& config) {
    config.validate();
    std::vector<RdpRow> rows;
    rows.reserve(thetas_deg.size());
    for (double theta : thetas_deg) {
        RdpRow row;
        row.theta_deg = theta;
        row.r_p = hwp_split(theta, config.hwp_offset_deg);
        BenchSettings s;
        s.theta_deg = theta;
        const auto state = assemble_state(config, s);
        try {
            row.visibility = visibility(state);
        } catch (const PhysicsError&) {
            row.ok = false;
            row.flag = "visibility undefined";
        }
        try {
            row.r_dp = detection_probe_ratio(state, config.wavelengths, config.rates());
        } catch (const PhysicsError&) {
            row.ok = false;
            row.r_dp = std::numeric_limits<double>::infinity();
            row.flag += row.flag.empty() ? "r_dp infinite" : "; r_dp infinite";
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace nlisim
