#pragma once

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gfmrelay/scenario.hpp"

namespace gfmrelay {

enum class ReportFormat { csv, records };

inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "records") return ReportFormat::records;
    throw std::invalid_argument("unknown report format '" + std::string(s) + "'");
}

inline constexpr std::string_view kCsvVersion = "1";

// CSV column order, version 1. Changing it requires bumping kCsvVersion.
inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "scenario_id", "echo_hash", "source", "clc", "fault_type", "fault_m", "fault_r_g_ohm", "placement",
        "status", "p_pu", "q_pu", "i_pre_pu",
        "phi2_deg", "phi2_decision", "phi0_deg", "phi0_decision", "dphi1_deg", "dphi1_decision",
        "dd21_deg", "d20_deg", "d20_decision", "phase_selection",
        "zv1_mag_pu", "zv1_deg", "zv2_mag_pu", "zv2_deg", "sigma1_mag", "sigma1_deg", "sigma2_mag", "sigma2_deg",
        "ze1_mag_pu", "ze1_deg", "ze2_mag_pu", "ze2_deg", "ze0_mag_pu", "ze0_deg", "zad_mag_pu", "zad_deg",
        "limiter_active", "peak_current_pu", "iterations", "residual", "oracle_residual", "error"};
    return cols;
}

namespace detail {

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s = buf;
    // a rounded negative zero prints as "-0.0"; keep the output sign-stable
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

inline std::string scientific(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline std::string hex64(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string angle_text(std::optional<double> a) { return a ? fixed(*a, 1) : ""; }

inline void polar_cells(std::vector<std::string>& row, std::optional<Phasor> z) {
    if (!z) {
        row.insert(row.end(), {"", ""});
        return;
    }
    row.push_back(fixed(std::abs(*z), 6));
    row.push_back(std::abs(*z) > kMagnitudeFloor ? fixed(angle_deg(*z), 1) : "");
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

inline std::vector<std::string> csv_row(const ScenarioReport& r) {
    std::vector<std::string> row = {r.id,
                                    hex64(r.echo_hash),
                                    std::string(to_string(r.source)),
                                    r.clc,
                                    std::string(to_string(r.fault.type)),
                                    format_number(r.fault.m),
                                    format_number(r.fault.r_g_ohm),
                                    std::string(to_string(r.fault.placement)),
                                    r.status};
    if (!r.ok()) {
        row.resize(csv_columns().size() - 1);
        row.push_back(r.error);
        return row;
    }
    row.push_back(fixed(r.op.p, 6));
    row.push_back(fixed(r.op.q, 6));
    row.push_back(fixed(std::abs(r.op.i_t), 6));
    for (const DirectionalDecision* d : {&r.phi2, &r.phi0, &r.dphi1}) {
        row.push_back(angle_text(d->angle));
        row.push_back(d->angle ? std::string(to_string(d->direction)) : "Indeterminate");
    }
    row.push_back(angle_text(r.selection.dd21));
    row.push_back(angle_text(r.selection.d20));
    row.push_back(r.d20_decision);
    row.push_back(std::string(label(r.selection)));
    polar_cells(row, r.z_v1);
    polar_cells(row, r.z_v2);
    polar_cells(row, r.sigma1);
    polar_cells(row, r.sigma2);
    for (Sequence k : kSequences) polar_cells(row, r.z_e[k]);
    polar_cells(row, r.z_ad);
    row.push_back(r.limiter_active ? "1" : "0");
    row.push_back(fixed(r.peak_current, 6));
    row.push_back(std::to_string(r.iterations));
    row.push_back(scientific(r.residual));
    row.push_back(r.oracle_residual ? scientific(*r.oracle_residual) : "");
    row.push_back("");
    return row;
}

inline nlohmann::ordered_json polar_json(std::optional<Phasor> z) {
    if (!z) return nullptr;
    return {{"mag", std::abs(*z)}, {"deg", angle_deg(*z)}};
}

inline nlohmann::ordered_json decision_json(const DirectionalDecision& d) {
    return {{"angle_deg", d.angle ? nlohmann::ordered_json(*d.angle) : nullptr},
            {"decision", d.angle ? to_string(d.direction) : "Indeterminate"}};
}

inline nlohmann::ordered_json record(const ScenarioReport& r) {
    nlohmann::ordered_json j;
    j["scenario_id"] = r.id;
    j["echo_hash"] = hex64(r.echo_hash);
    j["status"] = r.status;
    if (!r.ok()) j["error"] = r.error;
    if (r.ok()) {
        j["prefault"] = {{"p_pu", r.op.p},
                         {"q_pu", r.op.q},
                         {"e", polar_json(r.op.e)},
                         {"i_t", polar_json(r.op.i_t)},
                         {"v_t", polar_json(r.op.v_t)}};
        j["clc"] = r.clc;
        j["z_v1"] = polar_json(r.z_v1);
        j["z_v2"] = polar_json(r.z_v2);
        j["sigma1"] = polar_json(r.sigma1);
        j["sigma2"] = polar_json(r.sigma2);
        j["z_e"] = {{"positive", polar_json(r.z_e.positive)},
                    {"negative", polar_json(r.z_e.negative)},
                    {"zero", polar_json(r.z_e.zero)}};
        j["z_ad"] = polar_json(r.z_ad);
        j["phi2"] = decision_json(r.phi2);
        j["phi0"] = decision_json(r.phi0);
        j["dphi1"] = decision_json(r.dphi1);
        j["dd21_deg"] = r.selection.dd21 ? nlohmann::ordered_json(*r.selection.dd21) : nullptr;
        j["d20_deg"] = r.selection.d20 ? nlohmann::ordered_json(*r.selection.d20) : nullptr;
        j["d20_decision"] = r.d20_decision;
        j["phase_selection"] = label(r.selection);
        j["limiter_active"] = r.limiter_active;
        j["peak_current_pu"] = r.peak_current;
        j["iterations"] = r.iterations;
        j["residual"] = r.residual;
        j["oracle_residual"] = r.oracle_residual ? nlohmann::ordered_json(*r.oracle_residual) : nullptr;
    }
    nlohmann::ordered_json echo = nlohmann::ordered_json::array();
    for (const auto& e : r.echo)
        echo.push_back({{"key", e.key}, {"value", e.value}, {"provenance", to_string(e.provenance)}});
    j["echo"] = std::move(echo);
    return j;
}

}  // namespace detail

inline void write_report(const std::vector<ScenarioReport>& reports, ReportFormat format, std::ostream& out) {
    if (reports.empty()) throw std::invalid_argument("write_report needs at least one report");
    if (format == ReportFormat::csv) {
        const auto& cols = csv_columns();
        for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
        out << '\n';
        for (const auto& r : reports) {
            const auto row = detail::csv_row(r);
            for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << detail::csv_escape(row[k]);
            out << '\n';
        }
    } else {
        for (const auto& r : reports) out << detail::record(r).dump() << '\n';
    }
    if (!out) throw IoError("failed to write report");
}

inline std::string write_report(const std::vector<ScenarioReport>& reports, ReportFormat format) {
    std::ostringstream out;
    write_report(reports, format, out);
    return out.str();
}

}  // namespace gfmrelay
