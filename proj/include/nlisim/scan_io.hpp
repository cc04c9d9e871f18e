#pragma once

// ScanRecord <-> CSV / JSON, FringeFit -> JSON.
//
// CSV layout:
//   # scan-record/1
//   # axis = idler
//   # ... plan and config hash ...
//   position_m,expected_rate_hz,counts
//   0,1234.5,61
//
// The reader also accepts bare two-column lab traces (position_m, counts),
// with or without a header row.

#include "nlisim/analysis.hpp"
#include "nlisim/config_io.hpp"
#include "nlisim/errors.hpp"
#include "nlisim/scan.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nlisim {

inline constexpr std::string_view kScanRecordSchema = "scan-record/1";
inline constexpr std::string_view kFringeFitSchema = "fringe-fit/1";

namespace detail {

inline nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim_view(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline bool parse_number(std::string_view s, double& v) {
    s = trim_view(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace detail

inline nlohmann::json plan_to_json(const ScanPlan& p) {
    return {
        {"axis", std::string(to_string(p.axis))},
        {"start_m", p.start},
        {"stop_m", p.stop},
        {"steps", p.steps},
        {"dwell_s", detail::optional_json(p.dwell)},
        {"seed", p.seed},
        {"noise", std::string(to_string(p.noise))},
        {"theta_deg", detail::optional_json(p.settings.theta_deg)},
        {"knife_signal_mm", detail::optional_json(p.settings.knife_signal_mm)},
        {"knife_idler_mm", detail::optional_json(p.settings.knife_idler_mm)},
        {"r_p_override", detail::optional_json(p.settings.r_p_override)},
        {"t_s_override", detail::optional_json(p.settings.t_s_override)},
        {"t_i_override", detail::optional_json(p.settings.t_i_override)},
    };
}

/// JSON envelope. The creation timestamp is deliberately not part of the
/// data file so that identical runs produce identical bytes.
inline nlohmann::json scan_to_json(const ScanRecord& rec) {
    nlohmann::json j;
    j["schema"] = std::string(kScanRecordSchema);
    j["plan"] = plan_to_json(rec.plan);
    j["config_hash"] = rec.config_hash;
    j["position_m"] = rec.position;
    if (rec.has_expected_rate()) j["expected_rate_hz"] = rec.expected_rate;
    j["counts"] = rec.counts;
    return j;
}

inline std::string scan_to_csv(const ScanRecord& rec) {
    std::ostringstream out;
    out << "# " << kScanRecordSchema << "\n";
    const nlohmann::json plan = plan_to_json(rec.plan);
    for (const auto& [key, value] : plan.items()) out << "# " << key << " = " << value.dump() << "\n";
    out << "# config_hash = " << rec.config_hash << "\n";
    const bool rates = rec.has_expected_rate();
    out << (rates ? "position_m,expected_rate_hz,counts\n" : "position_m,counts\n");
    for (std::size_t k = 0; k < rec.size(); ++k) {
        out << detail::format_double(rec.position[k]) << ",";
        if (rates) out << detail::format_double(rec.expected_rate[k]) << ",";
        out << detail::format_double(rec.counts[k]) << "\n";
    }
    return out.str();
}

inline ScanRecord scan_from_json(const nlohmann::json& j) {
    try {
        ScanRecord rec;
        if (j.contains("schema") && j.at("schema").get<std::string>() != kScanRecordSchema)
            throw InputError("unsupported schema '" + j.at("schema").get<std::string>() + "'");
        rec.position = j.at("position_m").get<std::vector<double>>();
        rec.counts = j.at("counts").get<std::vector<double>>();
        if (j.contains("expected_rate_hz")) rec.expected_rate = j.at("expected_rate_hz").get<std::vector<double>>();
        if (j.contains("config_hash")) rec.config_hash = j.at("config_hash").get<std::string>();
        if (j.contains("plan")) {
            const auto& p = j.at("plan");
            rec.plan.axis = parse_axis(p.value("axis", std::string("idler")));
            rec.plan.start = p.value("start_m", 0.0);
            rec.plan.stop = p.value("stop_m", 0.0);
            rec.plan.steps = p.value("steps", static_cast<int>(rec.position.size()));
            rec.plan.seed = p.value("seed", std::uint64_t{0});
        }
        if (rec.position.size() != rec.counts.size() ||
            (rec.has_expected_rate() && rec.expected_rate.size() != rec.position.size()))
            throw InputError("scan record arrays differ in length");
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed scan record JSON: ") + e.what());
    }
}

/// Parses a ScanRecord CSV or a bare lab trace.
inline ScanRecord scan_from_csv(std::string_view text, std::string_view origin = "<csv>") {
    ScanRecord rec;
    int col_pos = 0, col_rate = -1, col_counts = 1;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        line = detail::trim_view(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto body = detail::trim_view(line.substr(1));
            const auto eq = body.find('=');
            if (eq != std::string_view::npos) {
                const auto key = detail::trim_view(body.substr(0, eq));
                auto value = detail::trim_view(body.substr(eq + 1));
                if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
                if (key == "config_hash") rec.config_hash = std::string(value);
                else if (key == "axis") rec.plan.axis = parse_axis(value);
            }
            continue;
        }
        const auto cells = detail::split_csv(line);
        double first = 0.0;
        if (!header_seen && rec.position.empty() && !detail::parse_number(cells[0], first)) {
            header_seen = true;
            col_pos = col_rate = col_counts = -1;
            for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
                if (cells[c] == "position_m" || cells[c] == "position") col_pos = c;
                else if (cells[c] == "expected_rate_hz") col_rate = c;
                else if (cells[c] == "counts") col_counts = c;
            }
            if (col_pos < 0 || col_counts < 0)
                throw InputError(std::string(origin) + ":" + std::to_string(line_no) +
                                 ": header must name position_m and counts columns");
            continue;
        }
        if (!header_seen && rec.position.empty() && cells.size() >= 3) {
            col_pos = 0; col_rate = 1; col_counts = 2;
        }
        auto cell = [&](int c) {
            double v = 0.0;
            if (c >= static_cast<int>(cells.size()) || !detail::parse_number(cells[c], v))
                throw InputError(std::string(origin) + ":" + std::to_string(line_no) + ": cannot parse row '" +
                                 std::string(line) + "'");
            return v;
        };
        rec.position.push_back(cell(col_pos));
        if (col_rate >= 0) rec.expected_rate.push_back(cell(col_rate));
        const double counts = cell(col_counts);
        if (counts < 0.0)
            throw InputError(std::string(origin) + ":" + std::to_string(line_no) + ": negative counts");
        rec.counts.push_back(counts);
    }
    if (rec.position.empty()) throw InputError(std::string(origin) + ": no data rows");
    rec.plan.steps = static_cast<int>(rec.position.size());
    rec.plan.start = rec.position.front();
    rec.plan.stop = rec.position.back();
    return rec;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

/// Loads a trace by extension: .json -> envelope, anything else -> CSV.
inline ScanRecord load_trace(const std::string& path) {
    const std::string text = read_text_file(path);
    if (path.size() >= 5 && path.ends_with(".json")) {
        try {
            return scan_from_json(nlohmann::json::parse(text));
        } catch (const nlohmann::json::exception& e) {
            throw InputError("'" + path + "' is not valid JSON: " + e.what());
        }
    }
    return scan_from_csv(text, path);
}

inline nlohmann::json fit_to_json(const FringeFit& f) {
    return {
        {"schema", std::string(kFringeFitSchema)},
        {"offset", f.offset},
        {"amplitude_fit", f.amplitude_fit},
        {"amplitude_pp", f.amplitude_pp},
        {"phase0", f.phase0},
        {"period_m", f.period},
        {"r_squared", f.r_squared},
        {"snr", detail::number_or_null(f.snr)},
        {"visibility_raw", f.visibility_raw},
        {"visibility_clamped", f.visibility_clamped},
        {"ss_res", f.ss_res},
        {"points", f.points},
    };
}

} // namespace nlisim
