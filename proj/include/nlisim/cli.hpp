#pragma once

// Command-line front end: fringe, fit, map, rdp and config subcommands.
//
// Exit codes: 0 success, 1 golden mismatch, 2 input/config error,
// 3 physics or fit error.

#include "nlisim/analysis.hpp"
#include "nlisim/bench.hpp"
#include "nlisim/config_io.hpp"
#include "nlisim/errors.hpp"
#include "nlisim/scan.hpp"
#include "nlisim/scan_io.hpp"
#include "nlisim/sweep.hpp"
#include "nlisim/sweep_io.hpp"
#include "nlisim/units.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#ifndef NLISIM_VERSION
#define NLISIM_VERSION "0.0.0"
#endif

namespace nlisim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitGoldenMismatch = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPhysics = 3;

inline constexpr const char* kConfigEnv = "NLISIM_CONFIG";

struct RunManifest {
    std::string command;
    std::vector<std::string> args;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
    nlohmann::json j = {
        {"schema", "run-manifest/1"},
        {"tool", "nlisim"},
        {"version", NLISIM_VERSION},
        {"command", m.command},
        {"args", m.args},
        {"config_hash", m.config_hash},
        {"seed", m.seed},
        {"outputs", m.outputs},
        {"created", utc_timestamp()},
    };
    write_text_file(path, j.dump(2) + "\n");
}

/// Options shared by every command that needs a bench config.
struct ConfigOptions {
    std::string path;
    bool ideal = false;
    std::vector<std::string> set;
    std::string p_total;

    void attach(CLI::App* app) {
        app->add_option("--config", path, "bench-config/1 file (default: $NLISIM_CONFIG, else built-in defaults)");
        app->add_flag("--ideal", ideal, "start from the lossless, noiseless bench instead of the calibrated default");
        app->add_option("--set", set, "override a config key, KEY=VALUE in the file's SI units (repeatable)");
        app->add_option("--p-total", p_total, "total pump power, e.g. 1mW (W if unitless)");
    }

    BenchConfig resolve() const {
        std::string file = path;
        if (file.empty())
            if (const char* env = std::getenv(kConfigEnv)) file = env;
        BenchConfig c = file.empty() ? (ideal ? BenchConfig::ideal() : BenchConfig::calibrated_default())
                                     : load_bench_config(file);
        bool pump_or_signal_set = false;
        bool idler_set = false;
        for (const auto& kv : set) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw InputError("--set expects KEY=VALUE, got '" + kv + "'");
            const std::string key = std::string(nlisim::detail::trim_view(std::string_view(kv).substr(0, eq)));
            set_config_value(c, key, std::string_view(kv).substr(eq + 1));
            pump_or_signal_set |= key == "lambda_pump" || key == "lambda_signal";
            idler_set |= key == "lambda_idler";
        }
        if (!p_total.empty()) c.p_total = units::parse_quantity(p_total, units::Dimension::power);
        if (pump_or_signal_set && !idler_set) {
            try {
                c.wavelengths.idler = idler_wavelength(c.wavelengths.pump, c.wavelengths.signal);
            } catch (const PhysicsError& e) {
                throw InputError(e.what());
            }
        }
        try {
            c.validate();
        } catch (const PhysicsError& e) {
            throw InputError(std::string("invalid bench config: ") + e.what());
        }
        return c;
    }
};

namespace detail {

inline std::optional<double> optional_quantity(const std::string& s, units::Dimension d) {
    if (s.empty()) return std::nullopt;
    return units::parse_quantity(s, d);
}

inline std::pair<double, double> parse_range(const std::string& s, units::Dimension d) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw InputError("range '" + s + "' must be LO:HI");
    return {units::parse_quantity(s.substr(0, colon), d), units::parse_quantity(s.substr(colon + 1), d)};
}

inline units::Dimension x_dimension(XAxis a) {
    return a == XAxis::theta_deg ? units::Dimension::angle : units::Dimension::dimensionless;
}

inline units::Dimension y_dimension(YAxis a) {
    return (a == YAxis::knife_signal_mm || a == YAxis::knife_idler_mm) ? units::Dimension::millimeters
                                                                      : units::Dimension::dimensionless;
}

} // namespace detail

struct FringeCommand {
    ConfigOptions config;
    std::string axis = "idler";
    double periods = 3.0;
    int steps = 200;
    std::uint64_t seed = 1;
    std::string theta, rp, knife_signal, knife_idler, dwell;
    std::string noise = "poisson";
    std::string out;

    void attach(CLI::App* app) {
        config.attach(app);
        app->add_option("--axis", axis, "scanned piezo: pump, signal or idler")->capture_default_str();
        app->add_option("--periods", periods, "scan length in fringe periods of the scanned wavelength")->capture_default_str();
        app->add_option("--steps", steps, "number of positions, endpoints included")->capture_default_str();
        app->add_option("--seed", seed, "64-bit seed for shot noise")->capture_default_str();
        app->add_option("--theta", theta, "balance waveplate angle, e.g. 45deg (default: balanced angle)");
        app->add_option("--rp", rp, "deliver this pump balance directly, bypassing waveplate and PBS (0..1)");
        app->add_option("--knife-signal", knife_signal, "signal blade position, e.g. 0.05mm (mm if unitless)");
        app->add_option("--knife-idler", knife_idler, "idler blade position, e.g. 0.05mm (mm if unitless)");
        app->add_option("--dwell", dwell, "counting time per step, e.g. 50ms (s if unitless)");
        app->add_option("--noise", noise, "poisson or expected (noiseless mean counts)")->capture_default_str();
        app->add_option("--out", out, "output prefix; writes PREFIX.csv, PREFIX.json, PREFIX.manifest.json")->required();
    }

    int run(const std::vector<std::string>& args, std::ostream& os) const {
        const BenchConfig c = config.resolve();
        ScanPlan plan;
        plan.axis = parse_axis(axis);
        std::tie(plan.start, plan.stop) = scan_range_for_periods(plan.axis, periods, c.wavelengths);
        plan.steps = steps;
        plan.seed = seed;
        plan.noise = parse_noise_mode(noise);
        plan.dwell = detail::optional_quantity(dwell, units::Dimension::time);
        plan.settings.theta_deg = detail::optional_quantity(theta, units::Dimension::angle);
        plan.settings.r_p_override = detail::optional_quantity(rp, units::Dimension::dimensionless);
        plan.settings.knife_signal_mm = detail::optional_quantity(knife_signal, units::Dimension::millimeters);
        plan.settings.knife_idler_mm = detail::optional_quantity(knife_idler, units::Dimension::millimeters);
        if (plan.settings.r_p_override && (*plan.settings.r_p_override < 0.0 || *plan.settings.r_p_override > 1.0))
            throw InputError("--rp must lie in [0,1]");

        ScanRecord rec = run_scan(plan, c);
        rec.created = utc_timestamp();

        RunManifest m{"fringe", args, rec.config_hash, seed, {out + ".csv", out + ".json"}};
        write_text_file(out + ".csv", scan_to_csv(rec));
        write_text_file(out + ".json", scan_to_json(rec).dump(2) + "\n");
        write_manifest(m, out + ".manifest.json");
        os << "wrote " << out << ".csv (" << rec.size() << " points, axis " << to_string(plan.axis) << ")\n";
        return kExitOk;
    }
};

struct FitCommand {
    ConfigOptions config;
    std::string input;
    std::string period;
    bool fit_period = false;
    bool weighted = false;
    std::string out;

    void attach(CLI::App* app) {
        config.attach(app);
        app->add_option("input", input, "trace: scan-record CSV/JSON or two-column lab CSV (position_m, counts)")->required();
        app->add_option("--period", period, "fringe period hint, e.g. 3390nm (default: wavelength of the recorded axis)");
        app->add_flag("--fit-period", fit_period, "refine the period within +-10% of the hint");
        app->add_flag("--weighted", weighted, "Poisson-weighted least squares");
        app->add_option("--out", out, "also write the fringe-fit JSON to this file");
    }

    int run(const std::vector<std::string>&, std::ostream& os) const {
        const ScanRecord rec = load_trace(input);
        double hint = 0.0;
        if (!period.empty()) {
            hint = units::parse_quantity(period, units::Dimension::length);
        } else {
            const BenchConfig c = config.resolve();
            hint = axis_wavelength(rec.plan.axis, c.wavelengths);
        }
        const FringeFit fit = fit_fringe(rec, {hint, fit_period, weighted});
        const std::string text = fit_to_json(fit).dump(2) + "\n";
        if (!out.empty()) write_text_file(out, text);
        os << text;
        return kExitOk;
    }
};

struct MapCommand {
    ConfigOptions config;
    std::string mode = "theory";
    std::string x = "rp";
    std::string y = "ts";
    std::string x_range, y_range;
    int x_points = 100;
    int y_points = 50;
    unsigned workers = 1;
    std::uint64_t seed = 1;
    int steps = 120;
    double periods = 2.0;
    std::string noise = "poisson";
    bool fit_period = false;
    std::string golden;
    double tolerance = 0.0;
    std::string out;

    void attach(CLI::App* app) {
        config.attach(app);
        app->add_option("--mode", mode, "theory (closed form) or experiment (simulated scans + fits)")->capture_default_str();
        app->add_option("--x", x, "x axis: rp (pump balance, 0..1) or theta (waveplate angle, deg)")->capture_default_str();
        app->add_option("--y", y, "y axis: ts, ti (transmissivity) or knife-signal, knife-idler (blade position, mm)")->capture_default_str();
        app->add_option("--x-range", x_range, "LO:HI, e.g. 22.5deg:67.5deg (default: full range of the axis)");
        app->add_option("--y-range", y_range, "LO:HI, e.g. -0.3mm:0.3mm (default: full range of the axis)");
        app->add_option("--x-points", x_points, "grid points along x")->capture_default_str();
        app->add_option("--y-points", y_points, "grid points along y")->capture_default_str();
        app->add_option("--workers", workers, "worker threads; never changes the result")->capture_default_str();
        app->add_option("--seed", seed, "master seed for experiment mode")->capture_default_str();
        app->add_option("--steps", steps, "experiment mode: scan steps per cell")->capture_default_str();
        app->add_option("--periods", periods, "experiment mode: idler periods per cell scan")->capture_default_str();
        app->add_option("--noise", noise, "experiment mode: poisson or expected")->capture_default_str();
        app->add_flag("--fit-period", fit_period, "experiment mode: float the period in each fit");
        app->add_option("--golden", golden, "compare against this stored map CSV; exit 1 on mismatch");
        app->add_option("--tolerance", tolerance, "relative per-cell tolerance for --golden (0 = bit-exact)")->capture_default_str();
        app->add_option("--out", out, "output prefix; writes PREFIX.csv, PREFIX.json, PREFIX.manifest.json");
    }

    GridSpec grid(const BenchConfig& c) const {
        GridSpec g;
        g.mode = parse_map_mode(mode);
        g.x = parse_x_axis(x);
        g.y = parse_y_axis(y);
        g.config = c;
        g.seed = seed;
        g.scan = {steps, periods, parse_noise_mode(noise), fit_period};

        if (x_range.empty()) {
            g.x_range = g.x == XAxis::r_p ? AxisRange{0.0, 1.0, x_points}
                                          : AxisRange{c.hwp_offset_deg, c.hwp_offset_deg + 45.0, x_points};
        } else {
            const auto [lo, hi] = detail::parse_range(x_range, detail::x_dimension(g.x));
            g.x_range = {lo, hi, x_points};
        }
        if (y_range.empty()) {
            const KnifeEdge& k = g.y == YAxis::knife_idler_mm ? c.knife_idler : c.knife_signal;
            g.y_range = (g.y == YAxis::t_s || g.y == YAxis::t_i)
                            ? AxisRange{0.0, 1.0, y_points}
                            : AxisRange{k.center - 2.0 * k.waist, k.center + 2.0 * k.waist, y_points};
        } else {
            const auto [lo, hi] = detail::parse_range(y_range, detail::y_dimension(g.y));
            g.y_range = {lo, hi, y_points};
        }
        return g;
    }

    int run(const std::vector<std::string>& args, std::ostream& os) const {
        if (golden.empty() && out.empty()) throw InputError("map needs --out and/or --golden");
        const GridSpec g = grid(config.resolve());
        const ParamMap map = compute_map(g, workers);

        if (!out.empty()) {
            RunManifest m{"map", args, map.config_hash, seed, {out + ".csv", out + ".json"}};
            write_text_file(out + ".csv", map_to_csv(map));
            write_text_file(out + ".json", map_to_json(map).dump() + "\n");
            write_manifest(m, out + ".manifest.json");
            os << "wrote " << out << ".csv (" << map.nx() << " x " << map.ny() << " cells, " << to_string(g.mode) << ")\n";
        }
        if (!golden.empty()) {
            const auto report = compare_to_golden(map, read_text_file(golden), tolerance);
            if (!report.match) {
                os << "golden mismatch: " << report.mismatches << " of " << report.cells << " cells differ; first at "
                   << report.first_mismatch << "\n";
                return kExitGoldenMismatch;
            }
            os << "golden match: " << report.cells << " cells\n";
        }
        return kExitOk;
    }
};

struct RdpCommand {
    ConfigOptions config;
    std::string theta_min, theta_max;
    int points = 91;
    std::vector<double> at_rp{0.01, 0.5};
    std::string detected_rate = "3e4";
    std::string out;

    void attach(CLI::App* app) {
        config.attach(app);
        app->add_option("--theta-min", theta_min, "first waveplate angle, e.g. 22.5deg (default: offset angle)");
        app->add_option("--theta-max", theta_max, "last waveplate angle (default: offset + 45deg)");
        app->add_option("--points", points, "angles in the sweep, endpoints included")->capture_default_str();
        app->add_option("--at-rp", at_rp, "extra rows at the angles giving these pump balances (0..1)")->capture_default_str();
        app->add_option("--detected-rate", detected_rate, "reference detected rate for absolute powers, e.g. 30kcps (1/s)")
            ->capture_default_str();
        app->add_option("--out", out, "profile CSV path; a .manifest.json is written alongside")->required();
    }

    int run(const std::vector<std::string>& args, std::ostream& os) const {
        const BenchConfig c = config.resolve();
        const double lo = theta_min.empty() ? c.hwp_offset_deg : units::parse_quantity(theta_min, units::Dimension::angle);
        const double hi = theta_max.empty() ? c.hwp_offset_deg + 45.0 : units::parse_quantity(theta_max, units::Dimension::angle);
        if (points < 2 || !(hi > lo)) throw InputError("rdp needs --points >= 2 and theta-max > theta-min");
        std::vector<double> thetas = linspace(lo, hi, points);
        for (double r : at_rp) thetas.push_back(hwp_angle_for(r, c.hwp_offset_deg));
        const double rate = units::parse_quantity(detected_rate, units::Dimension::rate);

        const auto rows = rdp_profile(thetas, c);
        write_text_file(out, rdp_profile_csv(rows, c, rate));
        write_manifest({"rdp", args, config_hash(c), 0, {out}}, out + ".manifest.json");
        os << "wrote " << out << " (" << rows.size() << " rows)\n";
        return kExitOk;
    }
};

struct ConfigCommand {
    ConfigOptions config;
    std::string out;

    void attach(CLI::App* app) {
        config.attach(app);
        app->add_option("--out", out, "write the resolved config here instead of stdout");
    }

    int run(const std::vector<std::string>&, std::ostream& os) const {
        const BenchConfig c = config.resolve();
        const std::string text = write_bench_config(c);
        if (out.empty()) os << text; else write_text_file(out, text);
        return kExitOk;
    }
};

/// Entry point shared by the binary and the tests. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"nlisim: folded nonlinear interferometer simulator and fringe analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(NLISIM_VERSION));

    FringeCommand fringe;
    FitCommand fit;
    MapCommand map;
    RdpCommand rdp;
    ConfigCommand cfg;
    fringe.attach(app.add_subcommand("fringe", "simulate a piezo fringe scan (CSV + JSON + manifest)"));
    fit.attach(app.add_subcommand("fit", "fit a sinusoid to a trace and report visibility, R^2 and SNR"));
    map.attach(app.add_subcommand("map", "balance x loss parameter map (theory or simulated experiment)"));
    rdp.attach(app.add_subcommand("rdp", "visibility and detection-to-probe power ratio versus waveplate angle"));
    cfg.attach(app.add_subcommand("config", "print the resolved bench config"));

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("nlisim");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "fringe") return fringe.run(args, out);
        if (name == "fit") return fit.run(args, out);
        if (name == "map") return map.run(args, out);
        if (name == "rdp") return rdp.run(args, out);
        return cfg.run(args, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const PhysicsError& e) {
        err << "error: " << e.what() << "\n";
        return kExitPhysics;
    }
}

} // namespace nlisim::cli
