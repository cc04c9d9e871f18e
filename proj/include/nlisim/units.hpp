#pragma once

#include "nlisim/errors.hpp"

#include <cctype>
#include <charconv>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

namespace nlisim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018 exact values.
inline constexpr double kPlanck = 6.62607015e-34;      // J s
inline constexpr double kSpeedOfLight = 299792458.0;   // m / s

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

namespace units {

enum class Dimension { length, power, angle, millimeters, rate, time, dimensionless };

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::pair<double, std::string_view> split_number(std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr == begin)
        throw InputError("cannot parse a number from '" + std::string(text) + "'");
    return {value, trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)))};
}

} // namespace detail

// Parses "1064nm", "3.39 um", "1mW", "45deg", "0.3mm", "50ms" into the canonical
// unit for the dimension: meters, watts, degrees, millimeters, 1/s, seconds.
// A bare number is taken to already be in the canonical unit.
inline double parse_quantity(std::string_view text, Dimension dim) {
    auto [value, suffix] = detail::split_number(text);
    if (suffix.empty()) return value;

    auto fail = [&]() -> double {
        throw InputError("unit '" + std::string(suffix) + "' is not valid for '" + std::string(text) + "'");
    };
    switch (dim) {
    case Dimension::length:
        if (suffix == "m") return value;
        if (suffix == "mm") return value * 1e-3;
        if (suffix == "um" || suffix == "µm") return value * 1e-6;
        if (suffix == "nm") return value * 1e-9;
        if (suffix == "pm") return value * 1e-12;
        return fail();
    case Dimension::millimeters:
        if (suffix == "mm") return value;
        if (suffix == "um" || suffix == "µm") return value * 1e-3;
        if (suffix == "m") return value * 1e3;
        return fail();
    case Dimension::power:
        if (suffix == "W") return value;
        if (suffix == "mW") return value * 1e-3;
        if (suffix == "uW" || suffix == "µW") return value * 1e-6;
        if (suffix == "nW") return value * 1e-9;
        if (suffix == "pW") return value * 1e-12;
        if (suffix == "fW") return value * 1e-15;
        if (suffix == "aW") return value * 1e-18;
        return fail();
    case Dimension::angle:
        if (suffix == "deg") return value;
        if (suffix == "rad") return rad_to_deg(value);
        return fail();
    case Dimension::rate:
        if (suffix == "Hz" || suffix == "cps") return value;
        if (suffix == "kHz" || suffix == "kcps") return value * 1e3;
        if (suffix == "MHz" || suffix == "Mcps") return value * 1e6;
        return fail();
    case Dimension::time:
        if (suffix == "s") return value;
        if (suffix == "ms") return value * 1e-3;
        if (suffix == "us" || suffix == "µs") return value * 1e-6;
        return fail();
    case Dimension::dimensionless:
        if (suffix == "%") return value / 100.0;
        return fail();
    }
    return fail();
}

} // namespace units
} // namespace nlisim
