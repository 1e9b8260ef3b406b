#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <string>
#include <vector>

#include "gfmrelay.hpp"

namespace gfmtest {

using namespace gfmrelay;

struct GridCase {
    FaultSpec spec;
    std::string label() const {
        return std::string(to_string(spec.type)) + " m=" + format_number(spec.m) + " Rg=" +
               format_number(spec.r_g_ohm) + " " + std::string(to_string(spec.placement));
    }
};

// 10 fault types x m {0.05, 0.5, 0.95} x R_g {0, 10, 30} ohm x {forward, reverse}.
inline std::vector<GridCase> oracle_grid() {
    std::vector<GridCase> out;
    for (FaultType t : kAllFaultTypes)
        for (double m : {0.05, 0.5, 0.95})
            for (double rg : {0.0, 10.0, 30.0})
                for (Placement p : {Placement::forward, Placement::reverse}) out.push_back({{t, m, rg, p}});
    return out;
}

// Machine source at its loaded operating point (P = 1, Q = 0).
inline SequenceNetwork loaded_sg_network() {
    const CircuitParams c;
    const SgModel sg;
    SequenceNetwork net = make_sg_network(c, sg);
    net.source.emf = prefault_solve(sg, net, 1.0, 0.0).e;
    return net;
}

// Inverter with its output impedances frozen at fault-mode values.
inline SequenceNetwork frozen_gfm_network() {
    const CircuitParams c;
    GfmModel g;
    return make_gfm_network(c, g, {0.021, 0.42}, {0.018, 0.37}, from_polar_deg(1.04, 12.0));
}

inline double reading_error(const BusReading& seq, const AbcReading& abc) {
    const SequenceTriple v = fortescue(abc.v), i = fortescue(abc.i);
    double e = 0.0;
    for (Sequence s : kSequences) e = std::max({e, std::abs(v[s] - seq.v[s]), std::abs(i[s] - seq.i[s])});
    return e;
}

inline double triple_error(const SequenceTriple& a, const PhaseTriple& abc) {
    const SequenceTriple b = fortescue(abc);
    double e = 0.0;
    for (Sequence s : kSequences) e = std::max(e, std::abs(a[s] - b[s]));
    return e;
}

// Sequence-domain vs phase-domain solution of one faulted network.
inline double oracle_error(const SequenceNetwork& net, const FaultSpec& spec) {
    const NetworkSolution seq = solve_sequence(net, spec);
    const AbcSolution abc = solve_abc_direct(net, spec);
    return std::max({reading_error(seq.bus1, abc.bus1), reading_error(seq.bus2, abc.bus2),
                     triple_error(seq.fault_current, abc.fault_current),
                     triple_error(seq.fault_voltage, abc.fault_voltage)});
}

// (faulted - pre-fault) minus the pure-fault network driven only at the fault.
inline double superposition_residual(const SequenceNetwork& net, const FaultSpec& spec) {
    const NetworkSolution post = solve_sequence(net, spec);
    const NetworkSolution pre = solve_prefault(net);
    const AbcSolution pure = solve_abc_pure_fault(net, spec);
    double r = 0.0;
    for (auto [p, q, d] : {std::tuple{&post.bus1, &pre.bus1, &pure.bus1}, std::tuple{&post.bus2, &pre.bus2, &pure.bus2}}) {
        const BusReading delta{p->bus, p->v - q->v, p->i - q->i};
        r = std::max(r, reading_error(delta, *d));
    }
    return r;
}

}  // namespace gfmtest
