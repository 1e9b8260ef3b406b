#pragma once

// Flat "dotted.key = value" documents and the published key schema.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gfmrelay/errors.hpp"

namespace gfmrelay {

// Where a parameter value comes from.
enum class Provenance {
    reference,  // published data of the reference circuit
    derived,    // follows from reference data through the per-unit system
    fixed,      // artifact default, not given by the reference data
    config,     // set explicitly by the document
};

inline std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::reference: return "reference";
        case Provenance::derived: return "derived";
        case Provenance::fixed: return "default";
        case Provenance::config: return "config";
    }
    return "?";
}

enum class ValueKind { number, integer, text, boolean_or_auto };

struct KeySpec {
    std::string_view key;
    std::string_view default_value;
    std::string_view unit;
    Provenance provenance;
    ValueKind kind;
    std::string_view description;
};

inline const std::vector<KeySpec>& key_schema() {
    using P = Provenance;
    using K = ValueKind;
    static const std::vector<KeySpec> schema = {
        {"scenario.id", "scenario", "-", P::fixed, K::text, "identifier copied into reports"},
        {"source.type", "sg", "-", P::fixed, K::text, "sg | gfm"},
        {"circuit.s_base_mva", "100", "MVA", P::reference, K::number, "rated power and power base"},
        {"circuit.v_grid_kv", "220", "kV", P::reference, K::number, "grid line-line voltage, grid-zone base"},
        {"circuit.v_ibr_kv", "33", "kV", P::reference, K::number, "inverter-side line-line voltage, inverter-zone base"},
        {"circuit.frequency_hz", "50", "Hz", P::reference, K::number, "fundamental frequency"},
        {"circuit.line_km", "100", "km", P::reference, K::number, "monitored line length"},
        {"circuit.line_r1_ohm_per_km", "0.03", "ohm/km", P::reference, K::number, "positive-sequence line resistance"},
        {"circuit.line_x1_ohm_per_km", "0.34", "ohm/km", P::reference, K::number, "positive-sequence line reactance"},
        {"circuit.line_r0_ohm_per_km", "0.18", "ohm/km", P::reference, K::number, "zero-sequence line resistance"},
        {"circuit.line_x0_ohm_per_km", "1.19", "ohm/km", P::reference, K::number, "zero-sequence line reactance"},
        {"grid.scr", "10", "-", P::fixed, K::number, "short-circuit ratio at bus 2 on the power base"},
        {"grid.xr", "10", "-", P::fixed, K::number, "X/R of the grid positive/negative-sequence impedance"},
        {"grid.z0_ratio", "3", "-", P::fixed, K::number, "Z_g0 / Z_g1"},
        {"grid.v_pu", "1", "p.u.", P::fixed, K::number, "grid EMF magnitude (angle 0)"},
        {"sg.x1_pu", "0.2", "p.u.", P::fixed, K::number, "machine positive-sequence reactance"},
        {"sg.x2_pu", "0.2", "p.u.", P::fixed, K::number, "machine negative-sequence reactance"},
        {"sg.x0_pu", "0.3", "p.u.", P::fixed, K::number, "machine/step-up zero-sequence reactance"},
        {"sg.collection_km", "10", "km", P::fixed, K::number, "collection line to bus 1 (line data per km)"},
        {"gfm.x_f_pu", "0.15", "p.u.", P::fixed, K::number, "filter reactance X_f1 = X_f2"},
        {"gfm.x_t1_pu", "0.1", "p.u.", P::fixed, K::number, "transformer leakage X_T1 = X_T2"},
        {"gfm.x_t0_pu", "0.1", "p.u.", P::fixed, K::number, "transformer zero-sequence leakage X_T0"},
        {"gfm.turns_ratio", "1", "-", P::derived, K::number, "off-nominal ratio; 33/220 kV on the zone bases is 1"},
        {"gfm.k_pv", "5", "p.u.", P::fixed, K::number, "voltage-loop proportional gain"},
        {"gfm.filter_in_network", "auto", "-", P::fixed, K::boolean_or_auto,
         "true | false | auto (true only for adaptive-vi)"},
        {"clc.mode", "adaptive-vi", "-", P::fixed, K::text,
         "circular | priority | instantaneous | virtual-admittance | adaptive-vi"},
        {"clc.i_lim_pu", "1.2", "p.u.", P::fixed, K::number, "current limit"},
        {"clc.clip_level_pu", "1.2", "p.u.", P::fixed, K::number, "instantaneous limiter clip level (peak)"},
        {"clc.r_vn_pu", "0.01", "p.u.", P::fixed, K::number, "virtual admittance nominal resistance"},
        {"clc.x_vn_pu", "0.05", "p.u.", P::fixed, K::number, "virtual admittance nominal reactance"},
        {"clc.n_xr", "20", "-", P::fixed, K::number, "X/R ratio of the virtual element"},
        {"clc.k_x", "20", "p.u./p.u.", P::fixed, K::number, "adaptive virtual impedance gain"},
        {"clc.i_th_pu", "1.1", "p.u.", P::fixed, K::number, "adaptive virtual impedance current threshold"},
        {"op.p_ref_pu", "1", "p.u.", P::fixed, K::number, "pre-fault active power at the measuring point"},
        {"op.q_ref_pu", "0", "p.u.", P::fixed, K::number, "pre-fault reactive power at the measuring point"},
        {"fault.type", "bcg", "-", P::fixed, K::text, "ag bg cg ab bc ca abg bcg cag abc"},
        {"fault.m", "0.5", "-", P::fixed, K::number, "location as a fraction of the faulted branch from bus 1"},
        {"fault.r_g_ohm", "0", "ohm", P::fixed, K::number, "fault resistance"},
        {"fault.placement", "forward", "-", P::fixed, K::text, "forward (on the line) | reverse (behind bus 1)"},
        {"relay.phi_non_deg", "45", "deg", P::fixed, K::number, "blocking wedge between directional zones"},
        {"relay.directional_floor_pu", "0.02", "p.u.", P::fixed, K::number, "directional magnitude floor"},
        {"relay.dd21_band_deg", "15", "deg", P::fixed, K::number, "phase selection band half-width for dd21"},
        {"relay.d20_band_deg", "30", "deg", P::fixed, K::number, "phase selection band half-width for d20"},
        {"relay.selection_floor_pu", "0.05", "p.u.", P::fixed, K::number, "phase selection magnitude floor"},
        {"solver.tolerance", "1e-9", "p.u.", P::fixed, K::number, "fixed-point update tolerance"},
        {"solver.max_iterations", "100", "-", P::fixed, K::integer, "fixed-point iteration cap"},
        {"solver.damping", "0.5", "-", P::fixed, K::number, "damping of the fallback fixed-point step"},
    };
    return schema;
}

inline const KeySpec* find_key(std::string_view key) {
    const auto& schema = key_schema();
    const auto it = std::find_if(schema.begin(), schema.end(), [&](const KeySpec& k) { return k.key == key; });
    return it == schema.end() ? nullptr : &*it;
}

struct DocumentEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Parses "key = value" lines; '#' starts a comment. Keys are not checked
// against the schema here.
inline std::vector<DocumentEntry> parse_document(std::string_view text) {
    std::vector<DocumentEntry> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(std::string_view(raw).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError("line " + std::to_string(line) + ": expected 'key = value'", line);
        DocumentEntry e{trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)), line};
        if (e.key.empty()) throw ParseError("line " + std::to_string(line) + ": empty key", line);
        const bool key_ok = std::all_of(e.key.begin(), e.key.end(), [](char c) {
            return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
        });
        if (!key_ok) throw ParseError("line " + std::to_string(line) + ": malformed key '" + e.key + "'", line, e.key);
        if (e.value.empty())
            throw ParseError("line " + std::to_string(line) + ": missing value for '" + e.key + "'", line, e.key);
        for (const auto& prev : out)
            if (prev.key == e.key)
                throw ParseError("line " + std::to_string(line) + ": duplicate key '" + e.key + "'", line, e.key);
        out.push_back(std::move(e));
    }
    return out;
}

// One resolved parameter: schema order, final text value and its origin.
struct EchoEntry {
    std::string key;
    std::string value;
    Provenance provenance;
};

using ParameterEcho = std::vector<EchoEntry>;

// Document text that reproduces the echo exactly.
inline std::string echo_document(const ParameterEcho& echo) {
    std::string out;
    for (const auto& e : echo) out += e.key + " = " + e.value + "\n";
    return out;
}

// 64-bit FNV-1a over the canonical echo document.
inline std::uint64_t echo_hash(const ParameterEcho& echo) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : echo_document(echo)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline double parse_number(const std::string& key, const std::string& text, std::size_t line) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line) + ": '" + key + "' expects a number, got '" + text + "'", line,
                         key);
    return v;
}

}  // namespace gfmrelay
