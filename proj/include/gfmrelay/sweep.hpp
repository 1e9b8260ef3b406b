#pragma once

#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "gfmrelay/presets.hpp"
#include "gfmrelay/report.hpp"
#include "gfmrelay/scenario.hpp"

namespace gfmrelay {

struct SweepSpec {
    std::string base_document;
    std::string param;  // dotted key, numeric
    double from = 0.0;
    double to = 1.0;
    std::size_t steps = 2;
    bool logarithmic = false;
    unsigned threads = 1;
    bool oracle_check = false;
};

// Document text with one key replaced (or appended).
inline std::string override_document(std::string_view base, const std::string& key, const std::string& value) {
    std::string out;
    for (const DocumentEntry& e : parse_document(base))
        if (e.key != key) out += e.key + " = " + e.value + "\n";
    return out + key + " = " + value + "\n";
}

// Grid points; the endpoints are exactly `from` and `to`.
inline std::vector<double> sweep_values(const SweepSpec& s) {
    std::vector<double> v(s.steps);
    const double last = static_cast<double>(s.steps - 1);
    for (std::size_t k = 0; k < s.steps; ++k) {
        const double t = static_cast<double>(k) / last;
        v[k] = s.logarithmic ? std::exp(std::log(s.from) + t * (std::log(s.to) - std::log(s.from)))
                             : s.from + t * (s.to - s.from);
    }
    v.front() = s.from;
    v.back() = s.to;
    return v;
}

inline void validate(const SweepSpec& s) {
    const KeySpec* key = find_key(s.param);
    if (!key) throw ValidationError(s.param, "unknown sweep parameter");
    if (key->kind != ValueKind::number && key->kind != ValueKind::integer)
        throw ValidationError(s.param, "sweep parameter must be numeric");
    if (s.steps < 2) throw ValidationError("steps", "a sweep needs at least 2 steps");
    if (s.logarithmic && !(s.from > 0.0 && s.to > 0.0))
        throw ValidationError(s.param, "logarithmic sweep bounds must be positive");
    // both bounds must satisfy the parameter's own range checks
    for (double bound : {s.from, s.to}) load_scenario(override_document(s.base_document, s.param, format_number(bound)));
}

inline ScenarioReport failed_report(const Scenario& s, std::string status, std::string error) {
    ScenarioReport r;
    r.id = s.id;
    r.echo = scenario_echo(s);
    r.echo_hash = echo_hash(r.echo);
    r.source = s.source;
    if (s.source == SourceType::gfm) r.clc = std::string(to_string(s.clc.mode));
    r.fault = s.fault;
    r.status = std::move(status);
    r.error = std::move(error);
    return r;
}

// Runs a scenario and turns solver or operating-point failures into a report
// with a non-ok status.
inline ScenarioReport run_captured(const Scenario& s, bool oracle_check = false) {
    try {
        return run_scenario(s, oracle_check);
    } catch (const ScenarioError& e) {
        return failed_report(s, e.status(), e.what());
    } catch (const ValidationError& e) {
        return failed_report(s, "invalid", e.what());
    }
}

inline std::vector<ScenarioReport> run_sweep(const SweepSpec& spec) {
    validate(spec);
    const std::vector<double> values = sweep_values(spec);
    std::vector<ScenarioReport> out(values.size());
    auto point = [&](std::size_t k) {
        std::string value = spec.param == "solver.max_iterations" ? std::to_string(std::llround(values[k]))
                                                                  : format_number(values[k]);
        try {
            out[k] = run_captured(load_scenario(override_document(spec.base_document, spec.param, value)),
                                  spec.oracle_check);
        } catch (const Error& e) {
            Scenario s = load_scenario(spec.base_document);
            out[k] = failed_report(s, "invalid", e.what());
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(values.size())));
    if (threads == 1) {
        for (std::size_t k = 0; k < values.size(); ++k) point(k);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t k; (k = next++) < values.size();) point(k);
        });
    for (auto& th : pool) th.join();
    return out;
}

// ---- supervising-element reliability matrix ----

enum class Element { phi2, phi0, dphi1, dd21, d20 };

inline constexpr std::array<Element, 5> kElements = {Element::phi2, Element::phi0, Element::dphi1, Element::dd21,
                                                    Element::d20};

inline std::string_view to_string(Element e) {
    static constexpr std::string_view names[] = {"phi2", "phi0", "dphi1", "dd21", "d20"};
    return names[static_cast<std::size_t>(e)];
}

struct Table1Setting {
    std::string label;
    std::string document;   // clc.* lines
    bool highly_inductive;  // output impedance dominated by reactance
};

inline const std::vector<Table1Setting>& table1_settings() {
    static const std::vector<Table1Setting> s = {
        {"circular", "clc.mode = circular\n", false},
        {"priority", "clc.mode = priority\n", false},
        {"instantaneous", "clc.mode = instantaneous\n", false},
        {"virtual-admittance-20", "clc.mode = virtual-admittance\nclc.n_xr = 20\n", true},
        {"adaptive-vi-20", "clc.mode = adaptive-vi\nclc.n_xr = 20\n", true},
        {"adaptive-vi-0.1", "clc.mode = adaptive-vi\nclc.n_xr = 0.1\n", false},
    };
    return s;
}

inline constexpr std::array<FaultType, 2> kTable1Faults = {FaultType::BCG, FaultType::AG};

struct ElementOutcome {
    bool pass = false;
    std::optional<double> angle;
    std::string note;  // failure reason or solver status
};

struct Table1Row {
    Table1Setting setting;
    std::vector<ScenarioReport> reports;                        // one per kTable1Faults entry
    std::array<std::array<ElementOutcome, 2>, 5> outcomes{};  // [element][fault]

    bool passes(Element e) const {
        const auto& o = outcomes[static_cast<std::size_t>(e)];
        return o[0].pass && o[1].pass;
    }
};

struct Table1Matrix {
    std::vector<Table1Row> rows;
};

inline ElementOutcome evaluate_element(const ScenarioReport& r, Element e, const PhaseSelectionConfig& sel = {}) {
    ElementOutcome o;
    if (!r.ok()) {
        o.note = r.status;
        return o;
    }
    auto directional = [&](const DirectionalDecision& d) {
        o.angle = d.angle;
        o.pass = d.angle && d.direction == Direction::forward;
        if (!d.angle) o.note = "below floor";
        else if (!o.pass) o.note = std::string(to_string(d.direction));
    };
    const SelectionCenter center = *canonical_center(r.fault.type);
    auto banded = [&](std::optional<double> a, double c, double band) {
        o.angle = a;
        o.pass = a && within_band(*a, c, band);
        if (!a) o.note = "below floor";
        else if (!o.pass) o.note = "outside band";
    };
    switch (e) {
        case Element::phi2: directional(r.phi2); break;
        case Element::phi0: directional(r.phi0); break;
        case Element::dphi1: directional(r.dphi1); break;
        case Element::dd21: banded(r.selection.dd21, center.dd21, sel.dd21_band); break;
        case Element::d20: banded(r.selection.d20, center.d20, sel.d20_band); break;
    }
    return o;
}

// Forward bolted faults at mid-line under each CLC setting.
inline Table1Matrix table1_matrix(unsigned threads = 1) {
    Table1Matrix m;
    const auto& settings = table1_settings();
    std::vector<Scenario> scenarios;
    for (const auto& s : settings)
        for (FaultType f : kTable1Faults) {
            std::string fault = std::string(to_string(f));
            for (char& c : fault) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            scenarios.push_back(load_scenario("scenario.id = table1-" + s.label + "-" + fault +
                                              "\nsource.type = gfm\n" + s.document + "fault.type = " + fault +
                                              "\nfault.m = 0.5\nfault.r_g_ohm = 0\n"));
        }
    std::vector<ScenarioReport> reports(scenarios.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k; (k = next++) < scenarios.size();) reports[k] = run_captured(scenarios[k]);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::max(1u, threads); ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    for (std::size_t i = 0; i < settings.size(); ++i) {
        Table1Row row{settings[i], {reports[2 * i], reports[2 * i + 1]}, {}};
        for (Element e : kElements)
            for (std::size_t f = 0; f < kTable1Faults.size(); ++f)
                row.outcomes[static_cast<std::size_t>(e)][f] =
                    evaluate_element(row.reports[f], e, scenarios[2 * i + f].selection);
        m.rows.push_back(std::move(row));
    }
    return m;
}

// The qualitative reliability pattern: phi0 always passes; phi2 and d20 pass
// exactly when the output impedance is highly inductive; dphi1 and dd21 each
// fail for at least one setting.
inline std::vector<std::string> table1_pattern_violations(const Table1Matrix& m) {
    std::vector<std::string> v;
    bool dphi1_fails = false, dd21_fails = false;
    for (const auto& row : m.rows) {
        if (!row.passes(Element::phi0)) v.push_back(row.setting.label + ": phi0 fails");
        for (Element e : {Element::phi2, Element::d20})
            if (row.passes(e) != row.setting.highly_inductive)
                v.push_back(row.setting.label + ": " + std::string(to_string(e)) +
                            (row.passes(e) ? " passes" : " fails"));
        dphi1_fails |= !row.passes(Element::dphi1);
        dd21_fails |= !row.passes(Element::dd21);
    }
    if (!dphi1_fails) v.push_back("dphi1 passes under every setting");
    if (!dd21_fails) v.push_back("dd21 passes under every setting");
    return v;
}

inline std::string table1_csv(const Table1Matrix& m) {
    std::string out = "clc,highly_inductive";
    for (Element e : kElements) {
        const std::string n(to_string(e));
        out += "," + n + "," + n + "_bcg_deg," + n + "_ag_deg";
    }
    out += "\n";
    for (const auto& row : m.rows) {
        out += row.setting.label + (row.setting.highly_inductive ? ",1" : ",0");
        for (Element e : kElements) {
            out += row.passes(e) ? ",pass" : ",fail";
            for (const auto& o : row.outcomes[static_cast<std::size_t>(e)])
                out += "," + (o.angle ? detail::fixed(*o.angle, 1) : o.note);
        }
        out += "\n";
    }
    return out;
}

}  // namespace gfmrelay
