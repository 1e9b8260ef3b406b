#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "gfmrelay/scenario.hpp"

namespace gfmrelay {

enum class PresetKind { scenario, table };

struct Preset {
    std::string name;
    std::string anchor;       // figure or table reproduced
    std::string description;
    PresetKind kind = PresetKind::scenario;
    std::string document;     // scenario document; empty for table presets
    std::vector<std::string> published_keys;  // keys whose values come from the reference publication
};

namespace detail {

// Circuit data published with the reference study; every other key is an artifact default.
inline std::vector<std::string> circuit_keys() {
    return {"circuit.s_base_mva",         "circuit.v_grid_kv",          "circuit.v_ibr_kv",
            "circuit.frequency_hz",       "circuit.line_km",            "circuit.line_r1_ohm_per_km",
            "circuit.line_x1_ohm_per_km", "circuit.line_r0_ohm_per_km", "circuit.line_x0_ohm_per_km"};
}

inline Preset make_preset(std::string name, std::string anchor, std::string description, std::string document,
                          std::vector<std::string> extra_published) {
    Preset p{std::move(name), std::move(anchor), std::move(description), PresetKind::scenario, {}, circuit_keys()};
    p.document = "scenario.id = " + p.name + "\n" + document;
    p.published_keys.insert(p.published_keys.end(), extra_published.begin(), extra_published.end());
    return p;
}

inline std::string gfm_doc(std::string_view mode, std::string_view fault, double m, double r_g,
                           std::string_view extra = {}) {
    return "source.type = gfm\nclc.mode = " + std::string(mode) + "\n" + std::string(extra) +
           "fault.type = " + std::string(fault) + "\nfault.m = " + format_number(m) +
           "\nfault.r_g_ohm = " + format_number(r_g) + "\n";
}

}  // namespace detail

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = [] {
        using detail::gfm_doc;
        using detail::make_preset;
        const std::vector<std::string> fault_keys = {"fault.type", "fault.m", "fault.r_g_ohm"};
        auto with = [&](std::vector<std::string> v) {
            v.insert(v.end(), fault_keys.begin(), fault_keys.end());
            return v;
        };
        std::vector<Preset> p;
        p.push_back(make_preset("sg-baseline-fwd", "figure 3", "machine source, bolted bcg on the line",
                                "source.type = sg\nfault.type = bcg\nfault.m = 0.5\nfault.placement = forward\n",
                                {}));
        p.push_back(make_preset("sg-baseline-rev", "figure 3", "machine source, bolted bcg behind the relay",
                                "source.type = sg\nfault.type = bcg\nfault.m = 0.5\nfault.placement = reverse\n",
                                {}));
        for (const char* mode : {"circular", "priority", "instantaneous"})
            p.push_back(make_preset(std::string("fig12-") + mode, "figure 12",
                                    std::string(mode) + " limiter, bolted ag at mid-line",
                                    gfm_doc(mode, "ag", 0.5, 0.0), with({"clc.mode"})));
        p.push_back(make_preset("fig13a", "figure 13(a)", "adaptive virtual impedance with X/R 0.1, bolted bcg",
                                gfm_doc("adaptive-vi", "bcg", 0.5, 0.0, "clc.n_xr = 0.1\n"),
                                with({"clc.mode", "clc.n_xr"})));
        p.push_back(make_preset("fig13b", "figure 13(b)", "adaptive virtual impedance with X/R 20, bolted bcg",
                                gfm_doc("adaptive-vi", "bcg", 0.5, 0.0, "clc.n_xr = 20\n"),
                                with({"clc.mode", "clc.n_xr"})));
        p.push_back(make_preset("fig14", "figure 14", "inductive adaptive virtual impedance, resistive ag near bus 1",
                                gfm_doc("adaptive-vi", "ag", 0.01, 30.0, "clc.n_xr = 20\n"),
                                with({"clc.mode"})));
        const std::pair<const char*, const char*> fig1617[] = {
            {"a", "circular"}, {"b", "virtual-admittance"}, {"c", "adaptive-vi"}};
        for (const auto& [suffix, mode] : fig1617)
            p.push_back(make_preset(std::string("fig16-") + suffix, std::string("figure 16(") + suffix + ")",
                                    std::string(mode) + ", bolted bcg at mid-line", gfm_doc(mode, "bcg", 0.5, 0.0),
                                    with({"clc.mode"})));
        for (const auto& [suffix, mode] : fig1617)
            p.push_back(make_preset(std::string("fig17-") + suffix, std::string("figure 17(") + suffix + ")",
                                    std::string(mode) + ", 20 ohm ag near bus 1", gfm_doc(mode, "ag", 0.01, 20.0),
                                    with({"clc.mode"})));
        Preset t;
        t.name = "table1";
        t.anchor = "table I";
        t.description = "supervising-element reliability matrix over six CLC settings";
        t.kind = PresetKind::table;
        t.published_keys = detail::circuit_keys();
        p.push_back(std::move(t));
        return p;
    }();
    return all;
}

inline const Preset& find_preset(std::string_view name) {
    const auto& all = presets();
    const auto it = std::find_if(all.begin(), all.end(), [&](const Preset& p) { return p.name == name; });
    if (it == all.end()) throw ValidationError("preset", "unknown preset '" + std::string(name) + "'");
    return *it;
}

// Fault scenarios over which the saturation limiters' negative-sequence
// impedance angle is compared (ag bolted, ag resistive near bus 1, bc bolted).
inline std::vector<FaultSpec> fig12_property_faults() {
    return {{FaultType::AG, 0.5, 0.0, Placement::forward},
            {FaultType::AG, 0.01, 30.0, Placement::forward},
            {FaultType::BC, 0.5, 0.0, Placement::forward}};
}

}  // namespace gfmrelay
