#pragma once

// Flat `key = value` serialization of BenchConfig (schema bench-config/1).
//
//   # bench-config/1
//   p_total = 0.001        # W
//   knife_signal_position_mm = -1
//
// Values are SI except the knife-edge geometry, whose keys carry an explicit
// `_mm` suffix, and the waveplate offset in degrees. Missing keys keep their
// calibrated-default value; unknown keys are rejected.

#include "nlisim/bench.hpp"
#include "nlisim/errors.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nlisim {

inline constexpr std::string_view kBenchConfigSchema = "bench-config/1";

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return std::to_string(v);
    return std::string(buf, ptr);
}

struct ConfigField {
    std::string_view key;
    std::string_view unit;
    std::function<double&(BenchConfig&)> ref;
};

inline const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields = {
        {"lambda_pump", "m", [](BenchConfig& c) -> double& { return c.wavelengths.pump; }},
        {"lambda_signal", "m", [](BenchConfig& c) -> double& { return c.wavelengths.signal; }},
        {"lambda_idler", "m", [](BenchConfig& c) -> double& { return c.wavelengths.idler; }},
        {"kappa", "1/W", [](BenchConfig& c) -> double& { return c.gain_law.kappa; }},
        {"p_total", "W", [](BenchConfig& c) -> double& { return c.p_total; }},
        {"hwp_offset_deg", "deg", [](BenchConfig& c) -> double& { return c.hwp_offset_deg; }},
        {"knife_signal_position_mm", "mm", [](BenchConfig& c) -> double& { return c.knife_signal.position; }},
        {"knife_signal_center_mm", "mm", [](BenchConfig& c) -> double& { return c.knife_signal.center; }},
        {"knife_signal_waist_mm", "mm", [](BenchConfig& c) -> double& { return c.knife_signal.waist; }},
        {"knife_idler_position_mm", "mm", [](BenchConfig& c) -> double& { return c.knife_idler.position; }},
        {"knife_idler_center_mm", "mm", [](BenchConfig& c) -> double& { return c.knife_idler.center; }},
        {"knife_idler_waist_mm", "mm", [](BenchConfig& c) -> double& { return c.knife_idler.waist; }},
        {"fixed_loss_signal", "transmissivity", [](BenchConfig& c) -> double& { return c.fixed_loss_signal; }},
        {"fixed_loss_idler", "transmissivity", [](BenchConfig& c) -> double& { return c.fixed_loss_idler; }},
        {"pbs_extinction", "fraction", [](BenchConfig& c) -> double& { return c.pbs_extinction; }},
        {"background_rate", "1/s", [](BenchConfig& c) -> double& { return c.background_rate; }},
        {"eta_detect", "fraction", [](BenchConfig& c) -> double& { return c.eta_detect; }},
        {"eta_probe", "fraction", [](BenchConfig& c) -> double& { return c.eta_probe; }},
        {"mode_flux", "1/s", [](BenchConfig& c) -> double& { return c.mode_flux; }},
        {"dwell", "s", [](BenchConfig& c) -> double& { return c.dwell; }},
    };
    return fields;
}

inline std::string_view trim_view(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace detail

inline std::vector<std::string> bench_config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : detail::config_fields()) keys.emplace_back(f.key);
    return keys;
}

/// Applies a single `key = value` assignment; value is parsed as a plain number.
inline void set_config_value(BenchConfig& c, std::string_view key, std::string_view value) {
    for (const auto& f : detail::config_fields()) {
        if (f.key != key) continue;
        value = detail::trim_view(value);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size())
            throw InputError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as a number");
        f.ref(c) = v;
        return;
    }
    throw InputError("unknown config key '" + std::string(key) + "'");
}

/// Canonical text form. Also the input of config_hash().
inline std::string write_bench_config(const BenchConfig& config) {
    BenchConfig c = config;
    std::ostringstream out;
    out << "# " << kBenchConfigSchema << "\n";
    for (const auto& f : detail::config_fields()) {
        out << f.key << " = " << detail::format_double(f.ref(c)) << "  # " << f.unit << "\n";
    }
    return out.str();
}

inline BenchConfig parse_bench_config(std::string_view text, std::string_view origin = "<config>") {
    BenchConfig c = BenchConfig::calibrated_default();
    bool idler_given = false;
    bool schema_seen = false;
    bool in_header = true;
    std::vector<std::string> problems;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto hash = line.find('#');
        if (in_header && hash != std::string_view::npos && line.find(kBenchConfigSchema) != std::string_view::npos)
            schema_seen = true;
        line = detail::trim_view(line.substr(0, hash));
        if (line.empty()) continue;
        in_header = false;

        const auto eq = line.find('=');
        const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) {
            problems.push_back(where + "expected 'key = value'");
            continue;
        }
        const auto key = detail::trim_view(line.substr(0, eq));
        const auto value = line.substr(eq + 1);
        try {
            set_config_value(c, key, value);
            if (key == "lambda_idler") idler_given = true;
        } catch (const InputError& e) {
            problems.push_back(where + e.what());
        }
    }
    if (!schema_seen)
        problems.insert(problems.begin(), std::string(origin) + ": missing schema header '# " + std::string(kBenchConfigSchema) + "'");
    if (!problems.empty()) {
        std::string msg = "invalid bench config:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw InputError(msg);
    }
    if (!idler_given) {
        try {
            c.wavelengths.idler = idler_wavelength(c.wavelengths.pump, c.wavelengths.signal);
        } catch (const PhysicsError& e) {
            throw InputError(std::string(origin) + ": " + e.what());
        }
    }
    try {
        c.validate();
    } catch (const PhysicsError& e) {
        throw InputError(std::string(origin) + ": " + e.what());
    }
    return c;
}

inline BenchConfig load_bench_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_bench_config(buf.str(), path);
}

inline void save_bench_config(const BenchConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write config file '" + path + "'");
    out << write_bench_config(c);
}

/// FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string config_hash(const BenchConfig& c) {
    const std::string text = write_bench_config(c);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace nlisim
