#pragma once

// ParamMap <-> long-form CSV / JSON, golden-file comparison, R_dp profile CSV.

#include "nlisim/bench.hpp"
#include "nlisim/config_io.hpp"
#include "nlisim/errors.hpp"
#include "nlisim/scan_io.hpp"
#include "nlisim/sweep.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nlisim {

inline constexpr std::string_view kParamMapSchema = "param-map/1";
inline constexpr std::string_view kRdpProfileSchema = "rdp-profile/1";

namespace detail {

inline std::string format_cell_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return format_double(v);
}

inline double parse_cell_value(std::string_view s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    if (!parse_number(s, v)) throw InputError("cannot parse map value '" + std::string(s) + "'");
    return v;
}

} // namespace detail

inline nlohmann::json grid_to_json(const GridSpec& g) {
    return {
        {"mode", std::string(to_string(g.mode))},
        {"x_axis", std::string(to_string(g.x))},
        {"x_range", {g.x_range.lo, g.x_range.hi, g.x_range.points}},
        {"y_axis", std::string(to_string(g.y))},
        {"y_range", {g.y_range.lo, g.y_range.hi, g.y_range.points}},
        {"scan", {{"steps", g.scan.steps},
                  {"periods", g.scan.periods},
                  {"noise", std::string(to_string(g.scan.noise))},
                  {"fit_period", g.scan.fit_period}}},
    };
}

inline std::string map_to_csv(const ParamMap& m) {
    std::ostringstream out;
    out << "# " << kParamMapSchema << "\n";
    out << "# mode = " << to_string(m.grid.mode) << "\n";
    out << "# x_axis = " << to_string(m.grid.x) << "\n";
    out << "# y_axis = " << to_string(m.grid.y) << "\n";
    out << "# config_hash = " << m.config_hash << "\n";
    out << "# seed = " << m.seed << "\n";
    out << "x,y,visibility,amplitude,r_dp,snr,flag\n";
    for (std::size_t j = 0; j < m.ny(); ++j) {
        for (std::size_t i = 0; i < m.nx(); ++i) {
            const auto& c = m.at(i, j);
            out << detail::format_cell_value(c.x) << ',' << detail::format_cell_value(c.y) << ','
                << detail::format_cell_value(c.visibility) << ',' << detail::format_cell_value(c.amplitude) << ','
                << detail::format_cell_value(c.r_dp) << ',' << detail::format_cell_value(c.snr) << ','
                << c.flag << '\n';
        }
    }
    return out.str();
}

inline nlohmann::json map_to_json(const ParamMap& m) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : m.cells) {
        nlohmann::json jc = {
            {"x", c.x},
            {"y", c.y},
            {"visibility", c.visibility},
            {"visibility_raw", c.visibility_raw},
            {"amplitude", c.amplitude},
            {"r_dp", detail::number_or_null(c.r_dp)},
            {"snr", detail::number_or_null(c.snr)},
            {"r_squared", c.r_squared},
            {"ok", c.ok},
        };
        if (!c.flag.empty()) jc["flag"] = c.flag;
        if (c.fit) jc["fit"] = fit_to_json(*c.fit);
        cells.push_back(std::move(jc));
    }
    return {
        {"schema", std::string(kParamMapSchema)},
        {"grid", grid_to_json(m.grid)},
        {"config_hash", m.config_hash},
        {"seed", m.seed},
        {"x", m.xs},
        {"y", m.ys},
        {"cells", std::move(cells)},
    };
}

/// One row of a long-form map CSV, as read back for golden comparison.
struct MapRow {
    double x, y, visibility, amplitude, r_dp, snr;
};

inline std::vector<MapRow> map_rows_from_csv(std::string_view text, std::string_view origin = "<map>") {
    std::vector<MapRow> rows;
    std::size_t pos = 0;
    bool header = false;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = detail::trim_view(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (!line.starts_with("x,y,visibility"))
                throw InputError(std::string(origin) + ": not a param-map CSV (missing header)");
            header = true;
            continue;
        }
        const auto cells = detail::split_csv(line);
        if (cells.size() < 6) throw InputError(std::string(origin) + ": short row '" + std::string(line) + "'");
        rows.push_back({detail::parse_cell_value(cells[0]), detail::parse_cell_value(cells[1]),
                        detail::parse_cell_value(cells[2]), detail::parse_cell_value(cells[3]),
                        detail::parse_cell_value(cells[4]), detail::parse_cell_value(cells[5])});
    }
    return rows;
}

struct GoldenReport {
    bool match = true;
    std::size_t cells = 0;
    std::size_t mismatches = 0;
    double max_abs_diff = 0.0;
    std::string first_mismatch;
};

/// Per-cell comparison of visibility, amplitude, r_dp and snr. A tolerance of
/// 0 demands bit-identical values; otherwise |a-b| <= tol * max(1, |b|).
inline GoldenReport compare_to_golden(const ParamMap& fresh, std::string_view golden_csv, double tolerance = 0.0) {
    const auto expected = map_rows_from_csv(golden_csv, "golden");
    const auto actual = map_rows_from_csv(map_to_csv(fresh), "fresh");
    GoldenReport r;
    r.cells = actual.size();
    if (expected.size() != actual.size()) {
        r.match = false;
        r.first_mismatch = "cell count " + std::to_string(actual.size()) + " != golden " + std::to_string(expected.size());
        return r;
    }
    auto same = [&](double a, double b) {
        if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
        if (std::isinf(a) || std::isinf(b)) return a == b;
        if (tolerance == 0.0) return a == b;
        return std::abs(a - b) <= tolerance * std::max(1.0, std::abs(b));
    };
    for (std::size_t k = 0; k < actual.size(); ++k) {
        const auto& a = actual[k];
        const auto& e = expected[k];
        const double av[] = {a.x, a.y, a.visibility, a.amplitude, a.r_dp, a.snr};
        const double ev[] = {e.x, e.y, e.visibility, e.amplitude, e.r_dp, e.snr};
        bool ok = true;
        for (int q = 0; q < 6; ++q) {
            if (!same(av[q], ev[q])) ok = false;
            if (std::isfinite(av[q]) && std::isfinite(ev[q]))
                r.max_abs_diff = std::max(r.max_abs_diff, std::abs(av[q] - ev[q]));
        }
        if (!ok) {
            if (r.mismatches == 0)
                r.first_mismatch = "row " + std::to_string(k) + " (x=" + detail::format_double(a.x) +
                                   ", y=" + detail::format_double(a.y) + ")";
            ++r.mismatches;
            r.match = false;
        }
    }
    return r;
}

/// Detected reference rate used to express the probe power in absolute terms.
inline constexpr double kReferenceDetectedRate = 3.0e4;  // counts/s

inline std::string rdp_profile_csv(const std::vector<RdpRow>& rows, const BenchConfig& c,
                                   double detected_rate = kReferenceDetectedRate) {
    const double detected_power = rate_to_power(detected_rate, c.wavelengths.signal);
    std::ostringstream out;
    out << "# " << kRdpProfileSchema << "\n";
    out << "# config_hash = " << config_hash(c) << "\n";
    out << "# detected_rate_hz = " << detail::format_double(detected_rate) << "\n";
    out << "theta_deg,r_p,visibility,r_dp,sample_pW_per_nW_detected,detected_power_W,sample_power_W,flag\n";
    for (const auto& r : rows) {
        const double per_nw = 1e3 / r.r_dp;  // pW on the sample per nW detected
        out << detail::format_cell_value(r.theta_deg) << ',' << detail::format_cell_value(r.r_p) << ','
            << detail::format_cell_value(r.visibility) << ',' << detail::format_cell_value(r.r_dp) << ','
            << detail::format_cell_value(per_nw) << ',' << detail::format_cell_value(detected_power) << ','
            << detail::format_cell_value(detected_power / r.r_dp) << ',' << r.flag << '\n';
    }
    return out.str();
}

} // namespace nlisim
