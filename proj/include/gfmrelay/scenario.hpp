#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gfmrelay/abc_oracle.hpp"
#include "gfmrelay/config.hpp"
#include "gfmrelay/relay.hpp"
#include "gfmrelay/sources.hpp"

namespace gfmrelay {

enum class SourceType { sg, gfm };

inline std::string_view to_string(SourceType s) { return s == SourceType::sg ? "sg" : "gfm"; }

enum class ClcMode { circular, priority, instantaneous, virtual_admittance, adaptive_vi };

inline constexpr std::array<std::string_view, 5> kClcModeNames = {"circular", "priority", "instantaneous",
                                                                  "virtual-admittance", "adaptive-vi"};

inline std::string_view to_string(ClcMode m) { return kClcModeNames[static_cast<std::size_t>(m)]; }

// Every clc.* value is kept regardless of the selected mode so the echo is complete.
struct ClcParams {
    ClcMode mode = ClcMode::adaptive_vi;
    double i_lim = 1.2;
    double clip_level = 1.2;
    double r_vn = 0.01;
    double x_vn = 0.05;
    double n_xr = 20.0;
    double k_x = 20.0;
    double i_th = 1.1;

    ClcConfig config() const {
        switch (mode) {
            case ClcMode::circular: return CircularSaturation{i_lim};
            case ClcMode::priority: return PrioritySaturation{i_lim};
            case ClcMode::instantaneous: return InstantaneousSaturation{clip_level, i_lim};
            case ClcMode::virtual_admittance: return VirtualAdmittance{r_vn, x_vn, n_xr, i_lim};
            case ClcMode::adaptive_vi: return AdaptiveVirtualImpedance{k_x, i_th, n_xr, i_lim};
        }
        return CircularSaturation{i_lim};
    }
};

struct Scenario {
    std::string id = "scenario";
    SourceType source = SourceType::sg;
    CircuitParams circuit{};
    SgModel sg{};
    GfmModel gfm{};  // clc and filter_in_network are filled from the fields below
    ClcParams clc{};
    std::optional<bool> filter_in_network;  // empty: mode default
    double p_ref = 1.0;
    double q_ref = 0.0;
    FaultSpec fault{};
    DirectionalConfig directional{};
    PhaseSelectionConfig selection{};
    FixedPointOptions solver{};
    std::set<std::string> configured;  // keys set explicitly by the document

    GfmModel gfm_model() const {
        GfmModel g = gfm;
        g.clc = clc.config();
        g.filter_in_network = filter_in_network.value_or(default_filter_in_network(g.clc));
        return g;
    }
};

// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

namespace detail {

struct Binding {
    std::string_view key;
    std::function<void(Scenario&, const std::string&, std::size_t)> set;
    std::function<std::string(const Scenario&)> get;
};

// std::complex guarantees array-compatible layout of its real and imaginary parts.
inline double& part(Phasor& z, int k) { return reinterpret_cast<double(&)[2]>(z)[k]; }

template <class Access>
Binding number(std::string_view key, Access access) {
    return {key,
            [key, access](Scenario& s, const std::string& v, std::size_t line) {
                access(s) = parse_number(std::string(key), v, line);
            },
            [access](const Scenario& s) { return format_number(access(const_cast<Scenario&>(s))); }};
}

template <class Parse, class Print>
Binding text(std::string_view key, Parse parse, Print print) {
    return {key,
            [key, parse](Scenario& s, const std::string& v, std::size_t) {
                try {
                    parse(s, v);
                } catch (const std::invalid_argument& e) {
                    throw ValidationError(std::string(key), e.what());
                }
            },
            print};
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline const std::vector<Binding>& bindings() {
    static const std::vector<Binding> table = [] {
        std::vector<Binding> b;
        b.push_back(text(
            "scenario.id", [](Scenario& s, const std::string& v) { s.id = v; },
            [](const Scenario& s) { return s.id; }));
        b.push_back(text(
            "source.type",
            [](Scenario& s, const std::string& v) {
                const std::string t = lower(v);
                if (t == "sg") s.source = SourceType::sg;
                else if (t == "gfm") s.source = SourceType::gfm;
                else throw std::invalid_argument("expected sg or gfm, got '" + v + "'");
            },
            [](const Scenario& s) { return std::string(to_string(s.source)); }));
        b.push_back(number("circuit.s_base_mva", [](Scenario& s) -> double& { return s.circuit.s_base_mva; }));
        b.push_back(number("circuit.v_grid_kv", [](Scenario& s) -> double& { return s.circuit.v_grid_kv; }));
        b.push_back(number("circuit.v_ibr_kv", [](Scenario& s) -> double& { return s.circuit.v_ibr_kv; }));
        b.push_back(number("circuit.frequency_hz", [](Scenario& s) -> double& { return s.circuit.frequency_hz; }));
        b.push_back(number("circuit.line_km", [](Scenario& s) -> double& { return s.circuit.line_km; }));
        b.push_back(number("circuit.line_r1_ohm_per_km",
                           [](Scenario& s) -> double& { return part(s.circuit.z_line1_ohm_per_km, 0); }));
        b.push_back(number("circuit.line_x1_ohm_per_km",
                           [](Scenario& s) -> double& { return part(s.circuit.z_line1_ohm_per_km, 1); }));
        b.push_back(number("circuit.line_r0_ohm_per_km",
                           [](Scenario& s) -> double& { return part(s.circuit.z_line0_ohm_per_km, 0); }));
        b.push_back(number("circuit.line_x0_ohm_per_km",
                           [](Scenario& s) -> double& { return part(s.circuit.z_line0_ohm_per_km, 1); }));
        b.push_back(number("grid.scr", [](Scenario& s) -> double& { return s.circuit.grid.scr; }));
        b.push_back(number("grid.xr", [](Scenario& s) -> double& { return s.circuit.grid.xr; }));
        b.push_back(number("grid.z0_ratio", [](Scenario& s) -> double& { return s.circuit.grid.z0_ratio; }));
        b.push_back(number("grid.v_pu", [](Scenario& s) -> double& { return part(s.circuit.grid.emf, 0); }));
        b.push_back(number("sg.x1_pu", [](Scenario& s) -> double& { return s.sg.x1; }));
        b.push_back(number("sg.x2_pu", [](Scenario& s) -> double& { return s.sg.x2; }));
        b.push_back(number("sg.x0_pu", [](Scenario& s) -> double& { return s.sg.x0; }));
        b.push_back(number("sg.collection_km", [](Scenario& s) -> double& { return s.sg.collection_km; }));
        b.push_back(number("gfm.x_f_pu", [](Scenario& s) -> double& { return s.gfm.x_f; }));
        b.push_back(number("gfm.x_t1_pu", [](Scenario& s) -> double& { return s.gfm.x_t1; }));
        b.push_back(number("gfm.x_t0_pu", [](Scenario& s) -> double& { return s.gfm.x_t0; }));
        b.push_back(number("gfm.turns_ratio", [](Scenario& s) -> double& { return s.gfm.turns_ratio; }));
        b.push_back(number("gfm.k_pv", [](Scenario& s) -> double& { return s.gfm.k_pv; }));
        b.push_back(text(
            "gfm.filter_in_network",
            [](Scenario& s, const std::string& v) {
                const std::string t = lower(v);
                if (t == "auto") s.filter_in_network.reset();
                else if (t == "true") s.filter_in_network = true;
                else if (t == "false") s.filter_in_network = false;
                else throw std::invalid_argument("expected true, false or auto, got '" + v + "'");
            },
            [](const Scenario& s) {
                return std::string(!s.filter_in_network ? "auto" : *s.filter_in_network ? "true" : "false");
            }));
        b.push_back(text(
            "clc.mode",
            [](Scenario& s, const std::string& v) {
                const std::string t = lower(v);
                for (std::size_t k = 0; k < kClcModeNames.size(); ++k)
                    if (kClcModeNames[k] == t) {
                        s.clc.mode = static_cast<ClcMode>(k);
                        return;
                    }
                throw std::invalid_argument("unknown CLC mode '" + v + "'");
            },
            [](const Scenario& s) { return std::string(to_string(s.clc.mode)); }));
        b.push_back(number("clc.i_lim_pu", [](Scenario& s) -> double& { return s.clc.i_lim; }));
        b.push_back(number("clc.clip_level_pu", [](Scenario& s) -> double& { return s.clc.clip_level; }));
        b.push_back(number("clc.r_vn_pu", [](Scenario& s) -> double& { return s.clc.r_vn; }));
        b.push_back(number("clc.x_vn_pu", [](Scenario& s) -> double& { return s.clc.x_vn; }));
        b.push_back(number("clc.n_xr", [](Scenario& s) -> double& { return s.clc.n_xr; }));
        b.push_back(number("clc.k_x", [](Scenario& s) -> double& { return s.clc.k_x; }));
        b.push_back(number("clc.i_th_pu", [](Scenario& s) -> double& { return s.clc.i_th; }));
        b.push_back(number("op.p_ref_pu", [](Scenario& s) -> double& { return s.p_ref; }));
        b.push_back(number("op.q_ref_pu", [](Scenario& s) -> double& { return s.q_ref; }));
        b.push_back(text(
            "fault.type", [](Scenario& s, const std::string& v) { s.fault.type = parse_fault_type(v); },
            [](const Scenario& s) { return lower(std::string(to_string(s.fault.type))); }));
        b.push_back(number("fault.m", [](Scenario& s) -> double& { return s.fault.m; }));
        b.push_back(number("fault.r_g_ohm", [](Scenario& s) -> double& { return s.fault.r_g_ohm; }));
        b.push_back(text(
            "fault.placement",
            [](Scenario& s, const std::string& v) { s.fault.placement = parse_placement(lower(v)); },
            [](const Scenario& s) { return std::string(to_string(s.fault.placement)); }));
        b.push_back(number("relay.phi_non_deg", [](Scenario& s) -> double& { return s.directional.phi_non; }));
        b.push_back(number("relay.directional_floor_pu", [](Scenario& s) -> double& { return s.directional.floor; }));
        b.push_back(number("relay.dd21_band_deg", [](Scenario& s) -> double& { return s.selection.dd21_band; }));
        b.push_back(number("relay.d20_band_deg", [](Scenario& s) -> double& { return s.selection.d20_band; }));
        b.push_back(number("relay.selection_floor_pu", [](Scenario& s) -> double& { return s.selection.floor; }));
        b.push_back(number("solver.tolerance", [](Scenario& s) -> double& { return s.solver.tolerance; }));
        b.push_back({"solver.max_iterations",
                     [](Scenario& s, const std::string& v, std::size_t line) {
                         const double x = parse_number("solver.max_iterations", v, line);
                         if (x != std::floor(x) || x < 1.0 || x > 1e6)
                             throw ValidationError("solver.max_iterations", "must be an integer in [1, 1000000]");
                         s.solver.max_iterations = static_cast<std::size_t>(x);
                     },
                     [](const Scenario& s) { return std::to_string(s.solver.max_iterations); }});
        b.push_back(number("solver.damping", [](Scenario& s) -> double& { return s.solver.damping; }));
        return b;
    }();
    return table;
}

inline void require(bool ok, const char* key, const char* what) {
    if (!ok) throw ValidationError(key, what);
}

inline void validate_ranges(const Scenario& s) {
    const CircuitParams& c = s.circuit;
    require(!s.id.empty() && s.id.find_first_of(" \t,\"") == std::string::npos, "scenario.id",
            "must be non-empty without spaces, commas or quotes");
    require(c.s_base_mva > 0.0, "circuit.s_base_mva", "must be positive");
    require(c.v_grid_kv > 0.0, "circuit.v_grid_kv", "must be positive");
    require(c.v_ibr_kv > 0.0, "circuit.v_ibr_kv", "must be positive");
    require(c.frequency_hz > 0.0, "circuit.frequency_hz", "must be positive");
    require(c.line_km > 0.0, "circuit.line_km", "must be positive");
    require(c.z_line1_ohm_per_km.real() > 0.0, "circuit.line_r1_ohm_per_km", "must be positive");
    require(c.z_line1_ohm_per_km.imag() > 0.0, "circuit.line_x1_ohm_per_km", "must be positive");
    require(c.z_line0_ohm_per_km.real() > 0.0, "circuit.line_r0_ohm_per_km", "must be positive");
    require(c.z_line0_ohm_per_km.imag() > 0.0, "circuit.line_x0_ohm_per_km", "must be positive");
    require(c.grid.scr > 0.0, "grid.scr", "must be positive");
    require(c.grid.xr > 0.0, "grid.xr", "must be positive");
    require(c.grid.z0_ratio > 0.0, "grid.z0_ratio", "must be positive");
    require(c.grid.emf.real() > 0.0, "grid.v_pu", "must be positive");
    require(s.sg.x1 > 0.0, "sg.x1_pu", "must be positive");
    require(s.sg.x2 > 0.0, "sg.x2_pu", "must be positive");
    require(s.sg.x0 > 0.0, "sg.x0_pu", "must be positive");
    require(s.sg.collection_km > 0.0, "sg.collection_km", "must be positive");
    require(s.gfm.x_f > 0.0, "gfm.x_f_pu", "must be positive");
    require(s.gfm.x_t1 > 0.0, "gfm.x_t1_pu", "must be positive");
    require(s.gfm.x_t0 > 0.0, "gfm.x_t0_pu", "must be positive");
    require(s.gfm.turns_ratio > 0.0, "gfm.turns_ratio", "must be positive");
    require(s.gfm.k_pv > 0.0, "gfm.k_pv", "must be positive");
    require(s.clc.i_lim >= 1.0, "clc.i_lim_pu", "must be at least 1 p.u.");
    require(s.clc.clip_level > 0.0, "clc.clip_level_pu", "must be positive");
    require(s.clc.r_vn > 0.0, "clc.r_vn_pu", "must be positive");
    require(s.clc.x_vn > 0.0, "clc.x_vn_pu", "must be positive");
    require(s.clc.n_xr > 0.0, "clc.n_xr", "must be positive");
    require(s.clc.k_x > 0.0, "clc.k_x", "must be positive");
    require(s.clc.i_th > 0.0 && s.clc.i_th < s.clc.i_lim, "clc.i_th_pu", "must lie in (0, i_lim)");
    require(std::abs(s.p_ref) <= 10.0, "op.p_ref_pu", "magnitude must not exceed 10 p.u.");
    require(std::abs(s.q_ref) <= 10.0, "op.q_ref_pu", "magnitude must not exceed 10 p.u.");
    require(s.fault.m >= 0.0 && s.fault.m <= 1.0, "fault.m", "must lie in [0, 1]");
    require(s.fault.r_g_ohm >= 0.0, "fault.r_g_ohm", "must be non-negative");
    require(s.directional.phi_non >= 30.0 && s.directional.phi_non <= 60.0, "relay.phi_non_deg",
            "must lie in [30, 60]");
    require(s.directional.floor > 0.0, "relay.directional_floor_pu", "must be positive");
    require(s.selection.dd21_band > 0.0 && s.selection.dd21_band <= 60.0, "relay.dd21_band_deg",
            "must lie in (0, 60]");
    require(s.selection.d20_band > 0.0 && s.selection.d20_band <= 60.0, "relay.d20_band_deg",
            "must lie in (0, 60]");
    require(s.selection.floor > 0.0, "relay.selection_floor_pu", "must be positive");
    require(s.solver.tolerance > 0.0 && s.solver.tolerance < 1e-3, "solver.tolerance", "must lie in (0, 1e-3)");
    require(s.solver.damping > 0.0 && s.solver.damping <= 1.0, "solver.damping", "must lie in (0, 1]");
}

}  // namespace detail

inline Scenario load_scenario(std::string_view text) {
    const std::vector<DocumentEntry> doc = parse_document(text);
    Scenario s;
    const auto& table = detail::bindings();
    for (const DocumentEntry& e : doc) {
        const auto it = std::find_if(table.begin(), table.end(), [&](const auto& b) { return b.key == e.key; });
        if (it == table.end()) throw ValidationError(e.key, "unknown key");
        it->set(s, e.value, e.line);
        s.configured.insert(e.key);
    }
    detail::validate_ranges(s);
    return s;
}

inline ParameterEcho scenario_echo(const Scenario& s) {
    ParameterEcho echo;
    for (const auto& b : detail::bindings()) {
        const KeySpec* spec = find_key(b.key);
        const Provenance p = s.configured.count(std::string(b.key)) ? Provenance::config
                             : spec                                 ? spec->provenance
                                                                    : Provenance::fixed;
        echo.push_back({std::string(b.key), b.get(s), p});
    }
    return echo;
}

// A solver failure annotated with the scenario that produced it.
class ScenarioError : public Error {
public:
    ScenarioError(const std::string& what, std::string status, std::string echo)
        : Error(what), status_(std::move(status)), echo_(std::move(echo)) {}
    const std::string& status() const { return status_; }
    const std::string& echo() const { return echo_; }

private:
    std::string status_;
    std::string echo_;
};

struct ScenarioReport {
    std::string id;
    ParameterEcho echo;
    std::uint64_t echo_hash = 0;
    SourceType source = SourceType::sg;
    std::string clc = "-";
    FaultSpec fault{};
    std::string status = "ok";  // ok | no-convergence | oscillation | singular | error
    std::string error;

    OperatingPoint op{};
    std::optional<Phasor> z_v1, z_v2, sigma1, sigma2;
    SequenceTriple z_e{};
    std::optional<Phasor> z_ad;

    DirectionalDecision phi2, phi0, dphi1;
    PhaseSelection selection;
    std::string d20_decision = "Unknown";

    std::size_t iterations = 0;
    double residual = 0.0;
    bool limiter_active = false;
    double peak_current = 0.0;
    std::optional<double> oracle_residual;

    bool ok() const { return status == "ok"; }
};

namespace detail {

inline double reading_difference(const BusReading& seq, const AbcReading& abc) {
    const SequenceTriple v = fortescue(abc.v), i = fortescue(abc.i);
    double d = 0.0;
    for (Sequence k : kSequences) d = std::max({d, std::abs(v[k] - seq.v[k]), std::abs(i[k] - seq.i[k])});
    return d;
}

// Largest sequence-component difference between the sequence-domain solution
// and the phase-domain solve of the same (frozen) network.
inline double oracle_residual(const SequenceNetwork& net, const FaultSpec& spec, const NetworkSolution& seq) {
    const AbcSolution abc = solve_abc_direct(net, spec);
    return std::max(reading_difference(seq.bus1, abc.bus1), reading_difference(seq.bus2, abc.bus2));
}

inline ScenarioReport run_unchecked(const Scenario& s, bool oracle_check) {
    ScenarioReport r;
    r.id = s.id;
    r.echo = scenario_echo(s);
    r.echo_hash = gfmrelay::echo_hash(r.echo);
    r.source = s.source;
    r.fault = s.fault;

    NetworkSolution post;
    SequenceNetwork frozen;
    if (s.source == SourceType::sg) {
        SequenceNetwork net = make_sg_network(s.circuit, s.sg);
        r.op = prefault_solve(s.sg, net, s.p_ref, s.q_ref);
        net.source.emf = r.op.e;
        post = solve_sequence(net, s.fault);
        r.z_e = s.sg.impedance();
        r.peak_current = peak_phase_magnitude(post.source_current);
        frozen = net;
    } else {
        const GfmModel g = s.gfm_model();
        r.clc = std::string(clc_name(g.clc));
        const SequenceNetwork net = make_gfm_network(s.circuit, g, 0.0, 0.0);
        r.op = prefault_solve(g, net, s.p_ref, s.q_ref);
        const double i_pre = std::abs(r.op.i_t);
        const double trigger = s.clc.mode == ClcMode::adaptive_vi ? s.clc.i_th : s.clc.i_lim;
        if (i_pre >= trigger)
            throw ValidationError("op.p_ref_pu", "pre-fault current " + format_number(i_pre) +
                                                     " p.u. already reaches the current-limit trigger");
        const FaultSolution fs = fault_fixed_point(g, net, s.fault, r.op, s.solver);
        post = fs.network;
        r.z_v1 = fs.clc.z_v1;
        r.z_v2 = fs.clc.z_v2;
        if (is_saturation(g.clc)) {
            r.sigma1 = fs.clc.sigma1;
            r.sigma2 = fs.clc.sigma2;
        }
        r.z_e = fs.clc.z_e;
        r.iterations = fs.clc.iterations;
        r.residual = fs.clc.residual;
        r.limiter_active = fs.clc.limiter_active;
        r.peak_current = fs.clc.peak_current;
        try {
            r.z_ad = z_ad(g, fs.clc, post, r.op, s.directional.floor).z_ad;
        } catch (const ZeroPhasor&) {
        }
        frozen = net;
        frozen.source = {g.turns_ratio * r.op.e, fs.clc.z_e};
    }

    const RelayReading reading = RelayReading::from(post.bus1, r.op.network.bus1);
    r.phi2 = directional_negative(reading, s.directional);
    r.phi0 = directional_zero(reading, s.directional);
    r.dphi1 = directional_incremental(reading, s.directional);
    r.selection = phase_select(reading, s.selection);
    r.d20_decision = d20_candidates(r.selection.d20, s.selection);
    if (oracle_check) r.oracle_residual = oracle_residual(frozen, s.fault, post);
    return r;
}

}  // namespace detail

// Solver failures are rethrown as ScenarioError carrying the parameter echo.
inline ScenarioReport run_scenario(const Scenario& s, bool oracle_check = false) {
    auto fail = [&](const std::string& status, const std::exception& e) {
        return ScenarioError(std::string(e.what()) + " (scenario " + s.id + ")", status,
                             echo_document(scenario_echo(s)));
    };
    try {
        return detail::run_unchecked(s, oracle_check);
    } catch (const OscillationDetected& e) {
        throw fail("oscillation", e);
    } catch (const NoConvergence& e) {
        throw fail("no-convergence", e);
    } catch (const SingularNetwork& e) {
        throw fail("singular", e);
    } catch (const ZeroPhasor& e) {
        throw fail("error", e);
    }
}

}  // namespace gfmrelay
