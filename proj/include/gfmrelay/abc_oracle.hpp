#pragma once

// Phase-domain solver built directly from the 3x3 phase admittances of every
// branch. Fault connections are explicit branches with their own current
// unknowns, so bolted faults need no special casing. Used to cross-check
// the sequence-domain pipeline.

#include <vector>

#include <Eigen/Dense>

#include "gfmrelay/network.hpp"

namespace gfmrelay {

struct AbcReading {
    Bus bus = Bus::bus1;
    PhaseTriple v{};
    PhaseTriple i{};
};

struct AbcSolution {
    AbcReading bus1{Bus::bus1};
    AbcReading bus2{Bus::bus2};
    PhaseTriple fault_current{};
    PhaseTriple fault_voltage{};
    PhaseTriple source_current{};
};

namespace detail {

// Y_abc = A diag(y0, y1, y2) A^-1 with abc = A [s0 s1 s2]^T.
inline Eigen::Matrix3cd phase_admittance(const SequenceTriple& z) {
    Eigen::Matrix3cd a;
    a << 1.0, 1.0, 1.0,
         1.0, kAlpha2, kAlpha,
         1.0, kAlpha, kAlpha2;
    Eigen::Matrix3cd d = Eigen::Matrix3cd::Zero();
    d(0, 0) = checked_admittance(z.zero);
    d(1, 1) = checked_admittance(z.positive);
    d(2, 2) = checked_admittance(z.negative);
    return a * d * a.inverse();
}

inline Eigen::Vector3cd to_vec(const PhaseTriple& p) { return {p.a, p.b, p.c}; }
inline PhaseTriple to_triple(const Eigen::Vector3cd& v) { return {v(0), v(1), v(2)}; }

enum class AbcMode { full, prefault, pure_fault, probe };

struct FaultElement {
    int from;        // unknown index, -1 = ground
    int to;          // unknown index, -1 = ground
    double r;        // p.u.
    bool is_switch;  // closes at inception (carries the pre-fault voltage in pure-fault mode)
};

inline std::vector<FaultElement> fault_elements(FaultType type, double r, int fault_node, int star) {
    auto ph = [&](int p) { return 3 * fault_node + p; };
    std::vector<FaultElement> out;
    switch (type) {
        case FaultType::AG: out.push_back({ph(0), -1, r, true}); break;
        case FaultType::BG: out.push_back({ph(1), -1, r, true}); break;
        case FaultType::CG: out.push_back({ph(2), -1, r, true}); break;
        case FaultType::AB: out.push_back({ph(0), ph(1), r, true}); break;
        case FaultType::BC: out.push_back({ph(1), ph(2), r, true}); break;
        case FaultType::CA: out.push_back({ph(2), ph(0), r, true}); break;
        case FaultType::ABG: case FaultType::BCG: case FaultType::CAG: {
            const int p = type == FaultType::ABG ? 0 : type == FaultType::BCG ? 1 : 2;
            const int q = (p + 1) % 3;
            out.push_back({ph(p), star, 0.0, true});
            out.push_back({ph(q), star, 0.0, true});
            out.push_back({star, -1, r, false});
            break;
        }
        case FaultType::ABC:
            for (int p = 0; p < 3; ++p) out.push_back({ph(p), -1, r, true});
            break;
    }
    return out;
}

inline AbcSolution solve_abc(const SequenceNetwork& net, const std::optional<FaultSpec>& spec, AbcMode mode,
                             Sequence probe = Sequence::positive) {
    const Topology topo = build_topology(net, spec);
    const bool with_fault = spec && (mode == AbcMode::full || mode == AbcMode::pure_fault);
    const bool sources_on = mode == AbcMode::full || mode == AbcMode::prefault;

    const int n_nodes = 3 * topo.nodes;
    const bool star_needed = with_fault && kind_of(spec->type) == FaultKind::line_line_ground;
    const int star = star_needed ? n_nodes : -1;
    const int n_volt = n_nodes + (star_needed ? 1 : 0);
    std::vector<FaultElement> elems;
    if (with_fault)
        elems = fault_elements(spec->type, spec->r_g_ohm / net.z_base_ohm, topo.fault, star);
    const int n = n_volt + static_cast<int>(elems.size());

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);

    auto stamp = [&](int from, int to, const Eigen::Matrix3cd& y) {
        m.block<3, 3>(3 * from, 3 * from) += y;
        if (to >= 0) {
            m.block<3, 3>(3 * to, 3 * to) += y;
            m.block<3, 3>(3 * from, 3 * to) -= y;
            m.block<3, 3>(3 * to, 3 * from) -= y;
        }
    };
    for (const auto& b : topo.branches) stamp(b.from, b.to, phase_admittance(b.z));
    const Eigen::Matrix3cd y_src = phase_admittance(net.source.z);
    const Eigen::Matrix3cd y_grid = phase_admittance(net.grid.z);
    stamp(topo.source_node, -1, y_src);
    stamp(topo.bus2, -1, y_grid);

    const Eigen::Vector3cd e_src = to_vec(inverse_fortescue({net.source.emf, 0.0, 0.0}));
    const Eigen::Vector3cd e_grid = to_vec(inverse_fortescue({net.grid.emf, 0.0, 0.0}));
    if (sources_on) {
        rhs.segment<3>(3 * topo.source_node) += y_src * e_src;
        rhs.segment<3>(3 * topo.bus2) += y_grid * e_grid;
    }
    if (mode == AbcMode::probe) {
        SequenceTriple unit;
        unit[probe] = 1.0;
        rhs.segment<3>(3 * topo.fault) += to_vec(inverse_fortescue(unit));
    }

    Eigen::VectorXcd pre_state;
    if (mode == AbcMode::pure_fault) {
        // pre-fault voltages on the same topology, used as switch sources
        Eigen::MatrixXcd mp = m.topLeftCorner(n_nodes, n_nodes);
        Eigen::VectorXcd rp = Eigen::VectorXcd::Zero(n_nodes);
        rp.segment<3>(3 * topo.source_node) += y_src * e_src;
        rp.segment<3>(3 * topo.bus2) += y_grid * e_grid;
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(mp);
        if (!lu.isInvertible()) throw SingularNetwork("abc pre-fault system is rank-deficient");
        pre_state = lu.solve(rp);
    }
    auto pre_voltage = [&](int idx) -> Phasor {
        if (idx < 0 || idx >= n_nodes) return 0.0;  // ground or star point
        return pre_state(idx);
    };

    for (std::size_t k = 0; k < elems.size(); ++k) {
        const auto& e = elems[k];
        const int col = n_volt + static_cast<int>(k);
        if (e.from >= 0) { m(e.from, col) += 1.0; m(col, e.from) += 1.0; }
        if (e.to >= 0) { m(e.to, col) -= 1.0; m(col, e.to) -= 1.0; }
        m(col, col) = -e.r;
        if (mode == AbcMode::pure_fault && e.is_switch)
            rhs(col) = -(pre_voltage(e.from) - pre_voltage(e.to));
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
    if (!lu.isInvertible()) throw SingularNetwork("abc nodal system is rank-deficient");
    const Eigen::VectorXcd x = lu.solve(rhs);

    auto node_v = [&](int node) -> Eigen::Vector3cd { return x.segment<3>(3 * node); };
    Eigen::Vector3cd inj = Eigen::Vector3cd::Zero();
    for (std::size_t k = 0; k < elems.size(); ++k) {
        const Phasor i = x(n_volt + static_cast<int>(k));
        const auto& e = elems[k];
        if (e.from >= 3 * topo.fault && e.from < 3 * topo.fault + 3) inj(e.from - 3 * topo.fault) += i;
        if (e.to >= 3 * topo.fault && e.to < 3 * topo.fault + 3) inj(e.to - 3 * topo.fault) -= i;
    }

    AbcSolution out;
    const Branch& b1 = topo.branches[static_cast<std::size_t>(topo.relay1_branch)];
    const Branch b2 = relay2_branch(topo);
    Eigen::Vector3cd i1 = phase_admittance(b1.z) * (node_v(b1.from) - node_v(b1.to));
    Eigen::Vector3cd i2 = phase_admittance(b2.z) * (node_v(b2.from) - node_v(b2.to));
    if (topo.fault_in_relay1 && with_fault) i1 += inj;
    if (topo.fault_in_relay2 && with_fault) i2 += inj;
    out.bus1 = {Bus::bus1, to_triple(node_v(topo.bus1)), to_triple(i1)};
    out.bus2 = {Bus::bus2, to_triple(node_v(topo.bus2)), to_triple(i2)};
    out.fault_current = to_triple(inj);
    if (topo.fault >= 0) out.fault_voltage = to_triple(node_v(topo.fault));
    const Eigen::Vector3cd e_on = sources_on ? e_src : Eigen::Vector3cd::Zero();
    out.source_current = to_triple(y_src * (e_on - node_v(topo.source_node)));
    return out;
}

}  // namespace detail

// Faulted network solved directly in phase coordinates.
inline AbcSolution solve_abc_direct(const SequenceNetwork& net, const FaultSpec& spec) {
    spec.validate();
    return detail::solve_abc(net, spec, detail::AbcMode::full);
}

// Unfaulted network (the fault node still exists so node sets line up).
inline AbcSolution solve_abc_prefault(const SequenceNetwork& net, const std::optional<FaultSpec>& spec = std::nullopt) {
    return detail::solve_abc(net, spec, detail::AbcMode::prefault);
}

// Sources removed; each closing fault branch carries minus its pre-fault voltage.
inline AbcSolution solve_abc_pure_fault(const SequenceNetwork& net, const FaultSpec& spec) {
    spec.validate();
    return detail::solve_abc(net, spec, detail::AbcMode::pure_fault);
}

// Sequence driving-point impedance at the fault node from a unit current injection.
inline Phasor abc_driving_point_impedance(const SequenceNetwork& net, const FaultSpec& spec, Sequence s) {
    spec.validate();
    const AbcSolution sol = detail::solve_abc(net, spec, detail::AbcMode::probe, s);
    return fortescue(sol.fault_voltage)[s];
}

}  // namespace gfmrelay
