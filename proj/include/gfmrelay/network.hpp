#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gfmrelay/errors.hpp"
#include "gfmrelay/phasor.hpp"

namespace gfmrelay {

enum class FaultType { AG, BG, CG, AB, BC, CA, ABG, BCG, CAG, ABC };

inline constexpr std::array<FaultType, 10> kAllFaultTypes = {
    FaultType::AG, FaultType::BG, FaultType::CG, FaultType::AB, FaultType::BC,
    FaultType::CA, FaultType::ABG, FaultType::BCG, FaultType::CAG, FaultType::ABC};

enum class FaultKind { three_phase, line_ground, line_line, line_line_ground };

inline FaultKind kind_of(FaultType t) {
    switch (t) {
        case FaultType::AG: case FaultType::BG: case FaultType::CG: return FaultKind::line_ground;
        case FaultType::AB: case FaultType::BC: case FaultType::CA: return FaultKind::line_line;
        case FaultType::ABG: case FaultType::BCG: case FaultType::CAG: return FaultKind::line_line_ground;
        case FaultType::ABC: return FaultKind::three_phase;
    }
    return FaultKind::three_phase;
}

// Power of alpha relating the fault's symmetric phase to phase a:
// 0 for AG/BC/BCG/ABC, 1 for BG/CA/CAG, 2 for CG/AB/ABG.
inline int rotation_index(FaultType t) {
    switch (t) {
        case FaultType::BG: case FaultType::CA: case FaultType::CAG: return 1;
        case FaultType::CG: case FaultType::AB: case FaultType::ABG: return 2;
        default: return 0;
    }
}

inline bool involves_ground(FaultType t) {
    const FaultKind k = kind_of(t);
    return k == FaultKind::line_ground || k == FaultKind::line_line_ground;
}

inline std::string_view to_string(FaultType t) {
    static constexpr std::array<std::string_view, 10> names = {"AG", "BG", "CG", "AB", "BC",
                                                              "CA", "ABG", "BCG", "CAG", "ABC"};
    return names[static_cast<std::size_t>(t)];
}

inline FaultType parse_fault_type(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    for (FaultType t : kAllFaultTypes)
        if (to_string(t) == upper) return t;
    throw std::invalid_argument("unknown fault type '" + std::string(text) + "'");
}

enum class Placement { forward, reverse };

inline std::string_view to_string(Placement p) { return p == Placement::forward ? "forward" : "reverse"; }

inline Placement parse_placement(std::string_view text) {
    if (text == "forward") return Placement::forward;
    if (text == "reverse") return Placement::reverse;
    throw std::invalid_argument("unknown placement '" + std::string(text) + "'");
}

struct FaultSpec {
    FaultType type = FaultType::BCG;
    double m = 0.5;          // fraction along the faulted branch, measured from bus 1
    double r_g_ohm = 0.0;    // fault resistance on the grid voltage base
    Placement placement = Placement::forward;

    void validate() const {
        if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("fault location m must lie in [0, 1]");
        if (!(r_g_ohm >= 0.0)) throw std::invalid_argument("fault resistance must be non-negative");
    }
};

// Ideal positive-sequence EMF behind per-sequence impedances.
struct SourceBranch {
    Phasor emf{};
    SequenceTriple z{};
};

// Radial per-sequence model: source EMF, optional collection branch to bus 1,
// the monitored line bus 1 - bus 2, and the grid equivalent at bus 2.
// All impedances are in p.u. on the grid-side base.
struct SequenceNetwork {
    SourceBranch source{};
    SequenceTriple collection{};  // terminal -> bus 1; all zero means the source sits at bus 1
    SequenceTriple line{};        // full length of the monitored line
    SourceBranch grid{};
    double z_base_ohm = 484.0;    // converts the fault resistance to p.u.

    bool has_collection() const {
        return std::abs(collection.positive) > 0.0 || std::abs(collection.negative) > 0.0 ||
               std::abs(collection.zero) > 0.0;
    }

    void validate() const {
        auto check = [](const SequenceTriple& z, bool allow_zero, const char* what) {
            for (Sequence s : kSequences) {
                if (z[s].real() < 0.0)
                    throw std::invalid_argument(std::string(what) + ": negative resistance");
                if (!allow_zero && std::abs(z[s]) == 0.0)
                    throw std::invalid_argument(std::string(what) + ": zero impedance");
            }
        };
        check(source.z, false, "source impedance");
        check(grid.z, false, "grid impedance");
        check(line, false, "line impedance");
        if (has_collection()) check(collection, false, "collection impedance");
    }
};

enum class Bus { terminal, bus1, bus2, fault };

inline std::string_view to_string(Bus b) {
    switch (b) {
        case Bus::terminal: return "terminal";
        case Bus::bus1: return "bus1";
        case Bus::bus2: return "bus2";
        case Bus::fault: return "fault";
    }
    return "?";
}

struct TheveninEquivalent {
    SequenceTriple z{};
    Phasor e_f{};
};

// v and i at a relay bus; i flows from the bus into the monitored line.
struct BusReading {
    Bus bus = Bus::bus1;
    SequenceTriple v{};
    SequenceTriple i{};
};

struct NetworkSolution {
    BusReading bus1{Bus::bus1};
    BusReading bus2{Bus::bus2};
    SequenceTriple fault_current{};           // leaving the network at the fault node
    SequenceTriple fault_voltage{};
    SequenceTriple source_current{};          // from the source EMF into the network
    SequenceTriple source_node_voltage{};     // node where the source branch attaches
};

struct PureFault {
    Phasor dv1{};
    Phasor di1{};
};

namespace detail {

struct Branch {
    int from;
    int to;
    SequenceTriple z;
};

struct Topology {
    int nodes = 0;
    int source_node = 0;
    int bus1 = 0;
    int bus2 = 0;
    int fault = -1;                 // -1 when no fault is applied
    std::vector<Branch> branches;
    int relay1_branch = -1;         // oriented away from bus 1
    int relay2_branch = -1;         // oriented away from bus 2
    bool fault_in_relay1 = false;   // fault at bus 1 on the line side of its CT
    bool fault_in_relay2 = false;
};

inline Branch flipped(const Branch& b) { return {b.to, b.from, b.z}; }

// Node numbering: bus1 = 0, bus2 = 1, then terminal and fault nodes as needed.
inline Topology build_topology(const SequenceNetwork& net, const std::optional<FaultSpec>& spec) {
    Topology t;
    t.bus1 = 0;
    t.bus2 = 1;
    t.nodes = 2;
    const bool collection = net.has_collection();
    int terminal = t.bus1;
    if (collection) terminal = t.nodes++;
    t.source_node = terminal;

    auto scaled = [](const SequenceTriple& z, double k) { return Phasor(k) * z; };
    auto add = [&](int from, int to, const SequenceTriple& z) {
        t.branches.push_back({from, to, z});
        return static_cast<int>(t.branches.size()) - 1;
    };

    const bool forward = spec && spec->placement == Placement::forward;
    const bool reverse = spec && spec->placement == Placement::reverse;
    const double m = spec ? spec->m : 0.0;

    // collection branch, possibly split by a reverse fault
    if (collection) {
        if (reverse && m > 0.0 && m < 1.0) {
            t.fault = t.nodes++;
            add(t.bus1, t.fault, scaled(net.collection, m));
            add(t.fault, terminal, scaled(net.collection, 1.0 - m));
        } else {
            add(t.bus1, terminal, net.collection);
            if (reverse) t.fault = (m == 0.0) ? t.bus1 : terminal;
        }
    } else if (reverse) {
        t.fault = t.bus1;
    }

    // monitored line, possibly split by a forward fault
    if (forward && m > 0.0 && m < 1.0) {
        t.fault = t.nodes++;
        t.relay1_branch = add(t.bus1, t.fault, scaled(net.line, m));
        t.relay2_branch = add(t.bus2, t.fault, scaled(net.line, 1.0 - m));
    } else {
        t.relay1_branch = add(t.bus1, t.bus2, net.line);
        t.relay2_branch = t.relay1_branch;
        if (forward) {
            t.fault = (m == 0.0) ? t.bus1 : t.bus2;
            t.fault_in_relay1 = (m == 0.0);
            t.fault_in_relay2 = (m != 0.0);
        }
    }
    return t;
}

inline Branch relay2_branch(const Topology& t) {
    const Branch& b = t.branches[static_cast<std::size_t>(t.relay2_branch)];
    return b.from == t.bus2 ? b : flipped(b);
}

inline Phasor checked_admittance(Phasor z) {
    if (std::abs(z) < 1e-12) throw SingularNetwork("zero-impedance branch in nodal model");
    return 1.0 / z;
}

}  // namespace detail

// Per-sequence nodal admittance model of a network with an optional fault location.
class NodalModel {
public:
    NodalModel(const SequenceNetwork& net, const std::optional<FaultSpec>& spec)
        : net_(net), topo_(detail::build_topology(net, spec)) {
        for (Sequence s : kSequences) {
            const auto k = index(s);
            Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(topo_.nodes, topo_.nodes);
            for (const auto& b : topo_.branches) {
                const Phasor yb = detail::checked_admittance(b.z[s]);
                y(b.from, b.from) += yb;
                y(b.to, b.to) += yb;
                y(b.from, b.to) -= yb;
                y(b.to, b.from) -= yb;
            }
            y(topo_.source_node, topo_.source_node) += detail::checked_admittance(net.source.z[s]);
            y(topo_.bus2, topo_.bus2) += detail::checked_admittance(net.grid.z[s]);
            lu_[k] = Eigen::FullPivLU<Eigen::MatrixXcd>(y);
            lu_[k].setThreshold(1e-13);
            if (!lu_[k].isInvertible()) throw SingularNetwork("nodal admittance matrix is rank-deficient");
        }
    }

    const detail::Topology& topology() const { return topo_; }
    const SequenceNetwork& network() const { return net_; }

    Eigen::VectorXcd solve(Sequence s, const Eigen::VectorXcd& rhs) const { return lu_[index(s)].solve(rhs); }

    // Node voltages with the sources acting and no fault current.
    Eigen::VectorXcd source_voltages(Sequence s) const {
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(topo_.nodes);
        if (s == Sequence::positive) {
            rhs(topo_.source_node) += net_.source.emf / net_.source.z.positive;
            rhs(topo_.bus2) += net_.grid.emf / net_.grid.z.positive;
        }
        return solve(s, rhs);
    }

    Eigen::VectorXcd unit_injection_response(Sequence s, int node) const {
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(topo_.nodes);
        rhs(node) = 1.0;
        return solve(s, rhs);
    }

    // Assembles bus readings from node voltages and the fault current.
    NetworkSolution readings(const std::array<Eigen::VectorXcd, 3>& v, const SequenceTriple& i_f) const {
        NetworkSolution out;
        out.fault_current = i_f;
        const auto& b1 = topo_.branches[static_cast<std::size_t>(topo_.relay1_branch)];
        const auto b2 = detail::relay2_branch(topo_);
        for (Sequence s : kSequences) {
            const auto& vs = v[index(s)];
            out.bus1.v[s] = vs(topo_.bus1);
            out.bus1.i[s] = (vs(b1.from) - vs(b1.to)) / b1.z[s] + (topo_.fault_in_relay1 ? i_f[s] : Phasor{});
            out.bus2.v[s] = vs(topo_.bus2);
            out.bus2.i[s] = (vs(b2.from) - vs(b2.to)) / b2.z[s] + (topo_.fault_in_relay2 ? i_f[s] : Phasor{});
            if (topo_.fault >= 0) out.fault_voltage[s] = vs(topo_.fault);
            const Phasor emf = s == Sequence::positive ? net_.source.emf : Phasor{};
            out.source_node_voltage[s] = vs(topo_.source_node);
            out.source_current[s] = (emf - vs(topo_.source_node)) / net_.source.z[s];
        }
        return out;
    }

    static std::size_t index(Sequence s) { return static_cast<std::size_t>(s); }

private:
    SequenceNetwork net_;
    detail::Topology topo_;
    std::array<Eigen::FullPivLU<Eigen::MatrixXcd>, 3> lu_;
};

inline TheveninEquivalent thevenin_at_fault(const NodalModel& model) {
    const int f = model.topology().fault;
    if (f < 0) throw std::invalid_argument("thevenin_at_fault: no fault location in model");
    TheveninEquivalent th;
    for (Sequence s : kSequences) th.z[s] = model.unit_injection_response(s, f)(f);
    th.e_f = model.source_voltages(Sequence::positive)(f);
    return th;
}

inline TheveninEquivalent thevenin_at_fault(const SequenceNetwork& net, const FaultSpec& spec) {
    return thevenin_at_fault(NodalModel(net, spec));
}

// Fault currents (leaving the network) for the a-referenced connection,
// rotated to the faulted phases. r_g is in p.u.
inline SequenceTriple solve_fault_boundary(const TheveninEquivalent& th, FaultType type, double r_g) {
    const int k = rotation_index(type);
    const Phasor rot1 = std::pow(kAlpha, 2 * k);
    const Phasor rot2 = std::pow(kAlpha, k);
    const Phasor e = th.e_f * rot1;
    const Phasor z1 = th.z.positive, z2 = th.z.negative, z0 = th.z.zero;
    auto guard = [](Phasor d) {
        if (std::abs(d) < 1e-12) throw SingularNetwork("fault interconnection denominator vanishes");
        return d;
    };
    Phasor i1{}, i2{}, i0{};
    switch (kind_of(type)) {
        case FaultKind::three_phase:
            i1 = e / guard(z1 + r_g);
            break;
        case FaultKind::line_ground:
            i1 = i2 = i0 = e / guard(z1 + z2 + z0 + 3.0 * r_g);
            break;
        case FaultKind::line_line:
            i1 = e / guard(z1 + z2 + r_g);
            i2 = -i1;
            break;
        case FaultKind::line_line_ground: {
            const Phasor z0g = z0 + 3.0 * r_g;
            const Phasor sum = guard(z2 + z0g);
            i1 = e / guard(z1 + z2 * z0g / sum);
            i2 = -i1 * z0g / sum;
            i0 = -i1 * z2 / sum;
            break;
        }
    }
    return {i1 / rot1, i2 / rot2, i0};
}

inline SequenceTriple solve_fault_boundary(const TheveninEquivalent& th, const FaultSpec& spec, double z_base_ohm) {
    return solve_fault_boundary(th, spec.type, spec.r_g_ohm / z_base_ohm);
}

inline NetworkSolution back_distribute(const NodalModel& model, const SequenceTriple& i_f) {
    const int f = model.topology().fault;
    std::array<Eigen::VectorXcd, 3> v;
    for (Sequence s : kSequences) {
        Eigen::VectorXcd vs = model.source_voltages(s);
        if (f >= 0) vs -= i_f[s] * model.unit_injection_response(s, f);
        v[NodalModel::index(s)] = std::move(vs);
    }
    return model.readings(v, f >= 0 ? i_f : SequenceTriple{});
}

inline NetworkSolution back_distribute(const SequenceNetwork& net, const FaultSpec& spec, const SequenceTriple& i_f) {
    return back_distribute(NodalModel(net, spec), i_f);
}

// thevenin_at_fault -> solve_fault_boundary -> back_distribute in one call.
inline NetworkSolution solve_sequence(const SequenceNetwork& net, const FaultSpec& spec) {
    spec.validate();
    const NodalModel model(net, spec);
    const TheveninEquivalent th = thevenin_at_fault(model);
    return back_distribute(model, solve_fault_boundary(th, spec, net.z_base_ohm));
}

inline NetworkSolution solve_prefault(const SequenceNetwork& net) {
    return back_distribute(NodalModel(net, std::nullopt), SequenceTriple{});
}

inline PureFault pure_fault_quantities(const BusReading& post, const BusReading& pre) {
    return {post.v.positive - pre.v.positive, post.i.positive - pre.i.positive};
}

}  // namespace gfmrelay
