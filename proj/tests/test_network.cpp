#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "support.hpp"

using namespace gfmrelay;
using namespace gfmtest;

namespace {

void expect_near(Phasor a, Phasor b, double tol) { EXPECT_LT(std::abs(a - b), tol) << a << " vs " << b; }

// Source j0.2 and collection j0.3 between the EMF and bus 1; the grid side is
// made so weak that it carries no current, leaving a radial circuit.
SequenceNetwork radial_network() {
    SequenceNetwork net;
    net.source = {1.0, {{0.0, 0.2}, {0.0, 0.2}, {0.0, 0.2}}};
    net.collection = {{0.0, 0.3}, {0.0, 0.3}, {0.0, 0.3}};
    net.line = {{0.0, 0.4}, {0.0, 0.4}, {0.0, 1.2}};
    net.grid = {0.0, {{0.0, 1e12}, {0.0, 1e12}, {0.0, 1e12}}};
    return net;
}

// Every branch purely reactive.
SequenceNetwork inductive_network() {
    SequenceNetwork net = loaded_sg_network();
    auto strip = [](SequenceTriple z) {
        for (Sequence s : kSequences) z[s] = {0.0, z[s].imag()};
        return z;
    };
    net.collection = strip(net.collection);
    net.line = strip(net.line);
    net.grid.z = strip(net.grid.z);
    return net;
}

}  // namespace

TEST(Thevenin, SeriesBranchesToFault) {
    const TheveninEquivalent th = thevenin_at_fault(radial_network(), {FaultType::AG, 0.0, 0.0, Placement::forward});
    expect_near(th.z.positive, {0.0, 0.5}, 1e-9);
    expect_near(th.e_f, 1.0, 1e-9);
}

TEST(Thevenin, BoundaryLocationIsBus1) {
    const SequenceNetwork net = loaded_sg_network();
    const TheveninEquivalent fwd = thevenin_at_fault(net, {FaultType::AG, 0.0, 0.0, Placement::forward});
    const TheveninEquivalent rev = thevenin_at_fault(net, {FaultType::AG, 0.0, 0.0, Placement::reverse});
    for (Sequence s : kSequences) expect_near(fwd.z[s], rev.z[s], 1e-12);
    expect_near(fwd.e_f, solve_prefault(net).bus1.v.positive, 1e-12);
}

TEST(Thevenin, MatchesPhaseDomainProbe) {
    for (const SequenceNetwork& net : {loaded_sg_network(), frozen_gfm_network()})
        for (Placement p : {Placement::forward, Placement::reverse})
            for (double m : {0.0, 0.3, 0.5, 1.0}) {
                const FaultSpec spec{FaultType::BCG, m, 0.0, p};
                const TheveninEquivalent th = thevenin_at_fault(net, spec);
                for (Sequence s : kSequences) expect_near(th.z[s], abc_driving_point_impedance(net, spec, s), 1e-10);
            }
}

TEST(FaultBoundary, ThreePhaseBolted) {
    const TheveninEquivalent th{{{0.0, 0.5}, {0.0, 0.5}, {0.0, 0.5}}, 1.0};
    const SequenceTriple i = solve_fault_boundary(th, FaultType::ABC, 0.0);
    expect_near(i.positive, from_polar_deg(2.0, -90.0), 1e-12);
    expect_near(i.negative, 0.0, 1e-12);
    expect_near(i.zero, 0.0, 1e-12);
}

TEST(FaultBoundary, SingleLineToGroundAgainstPhaseDomain) {
    const SequenceTriple z{{0.0, 0.5}, {0.0, 0.5}, {0.0, 0.2}};
    const SequenceTriple i = solve_fault_boundary({z, 1.0}, FaultType::AG, 0.0);
    // Phase-domain Thevenin: V = E - Z_abc I with only phase a shorted.
    Eigen::Matrix3cd a;
    const Phasor al = kAlpha;
    a << 1, 1, 1, 1, al * al, al, 1, al, al * al;  // columns: zero, positive, negative
    const Eigen::Matrix3cd z_abc = a * Eigen::Vector3cd(z.zero, z.positive, z.negative).asDiagonal() * a.inverse();
    const Phasor i_a = 1.0 / z_abc(0, 0);
    for (Sequence s : kSequences) expect_near(i[s], i_a / 3.0, 1e-12);
    EXPECT_NEAR(std::abs(i.positive), 0.833, 1e-3);
    EXPECT_NEAR(angle_deg(i.positive), -90.0, 1e-9);
}

TEST(FaultBoundary, DoubleLineToGroundDividerAngles) {
    const TheveninEquivalent th{{{0.01, 0.5}, {0.02, 0.3}, {0.02, 0.3}}, from_polar_deg(1.0, 7.0)};
    const SequenceTriple i = solve_fault_boundary(th, FaultType::BCG, 0.0);
    EXPECT_NEAR(angle_between(i.negative, i.zero), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(angle_between(i.negative, i.positive)), 180.0, 1e-9);
    expect_near(i.positive + i.negative + i.zero, 0.0, 1e-12);
}

TEST(BackDistribute, ZeroInjectionGivesPreFault) {
    const SequenceNetwork net = loaded_sg_network();
    const FaultSpec spec{FaultType::BCG, 0.5, 0.0, Placement::forward};
    const NetworkSolution a = back_distribute(net, spec, SequenceTriple{});
    const NetworkSolution b = solve_prefault(net);
    for (Sequence s : kSequences) {
        expect_near(a.bus1.v[s], b.bus1.v[s], 1e-13);
        expect_near(a.bus1.i[s], b.bus1.i[s], 1e-13);
        expect_near(a.bus2.i[s], b.bus2.i[s], 1e-13);
    }
}

TEST(BackDistribute, RadialCurrentEqualsFaultCurrent) {
    SequenceNetwork net = radial_network();
    for (FaultType t : kAllFaultTypes) {
        const FaultSpec spec{t, 0.5, 5.0, Placement::forward};
        const NetworkSolution sol = solve_sequence(net, spec);
        for (Sequence s : kSequences) expect_near(sol.bus1.i[s], sol.fault_current[s], 1e-9);
    }
}

TEST(BackDistribute, DefaultBcgMatchesOracle) {
    EXPECT_LT(oracle_error(loaded_sg_network(), {FaultType::BCG, 0.5, 0.0, Placement::forward}), 1e-8);
}

TEST(AbcOracle, NoFaultReproducesPreFault) {
    const SequenceNetwork net = loaded_sg_network();
    const NetworkSolution seq = solve_prefault(net);
    const AbcSolution abc = solve_abc_prefault(net);
    EXPECT_LT(reading_error(seq.bus1, abc.bus1), 1e-10);
    EXPECT_LT(reading_error(seq.bus2, abc.bus2), 1e-10);
}

TEST(AbcOracle, SingleLineToGroundHealthyPhasesCarryNothing) {
    const AbcSolution abc = solve_abc_direct(loaded_sg_network(), {FaultType::AG, 0.5, 0.0, Placement::forward});
    EXPECT_LT(std::abs(abc.fault_current.b), 1e-12);
    EXPECT_LT(std::abs(abc.fault_current.c), 1e-12);
    EXPECT_GT(std::abs(abc.fault_current.a), 1.0);
}

TEST(PureFault, Examples) {
    const BusReading pre{Bus::bus1, {1.0, 0.0, 0.0}, {0.5, 0.0, 0.0}};
    const PureFault none = pure_fault_quantities(pre, pre);
    EXPECT_EQ(none.dv1, Phasor{});
    EXPECT_EQ(none.di1, Phasor{});
    const BusReading post{Bus::bus1, {0.3, 0.1, 0.0}, {{0.2, -2.0}, 0.4, 0.0}};
    const PureFault noload = pure_fault_quantities(post, BusReading{});
    EXPECT_EQ(noload.dv1, post.v.positive);
    EXPECT_EQ(noload.di1, post.i.positive);
}

TEST(PureFault, MachineIncrementalAngleIsInductive) {
    const SequenceNetwork net = loaded_sg_network();
    const NetworkSolution post = solve_sequence(net, {FaultType::BCG, 0.5, 0.0, Placement::forward});
    const PureFault d = pure_fault_quantities(post.bus1, solve_prefault(net).bus1);
    EXPECT_NEAR(angle_between(d.dv1, d.di1), -90.0, 5.0);
}

TEST(OracleGrid, SequenceAndPhaseDomainAgree) {
    for (const SequenceNetwork& net : {loaded_sg_network(), frozen_gfm_network()})
        for (const GridCase& c : oracle_grid()) EXPECT_LT(oracle_error(net, c.spec), 1e-8) << c.label();
}

TEST(OracleGrid, SuperpositionIdentity) {
    for (const SequenceNetwork& net : {loaded_sg_network(), frozen_gfm_network()})
        for (const GridCase& c : oracle_grid()) EXPECT_LT(superposition_residual(net, c.spec), 1e-9) << c.label();
}

TEST(OracleGrid, AbsentSequenceComponents) {
    const SequenceNetwork net = loaded_sg_network();
    for (const GridCase& c : oracle_grid()) {
        const NetworkSolution sol = solve_sequence(net, c.spec);
        if (!involves_ground(c.spec.type)) {
            EXPECT_LT(std::abs(sol.bus1.i.zero), 1e-9) << c.label();
            EXPECT_LT(std::abs(sol.bus2.i.zero), 1e-9) << c.label();
            EXPECT_LT(std::abs(sol.fault_current.zero), 1e-9) << c.label();
        }
        if (c.spec.type == FaultType::ABC) {
            EXPECT_LT(std::abs(sol.bus1.i.negative), 1e-9) << c.label();
            EXPECT_LT(std::abs(sol.bus2.i.negative), 1e-9) << c.label();
        }
    }
}

TEST(OracleGrid, ReversePlacementFlipsNegativeSequenceDirection) {
    const SequenceNetwork net = loaded_sg_network();
    for (FaultType t : kAllFaultTypes) {
        if (t == FaultType::ABC) continue;
        for (double m : {0.05, 0.5, 0.95}) {
            const auto fwd = solve_sequence(net, {t, m, 0.0, Placement::forward}).bus1;
            const auto rev = solve_sequence(net, {t, m, 0.0, Placement::reverse}).bus1;
            const double a_fwd = angle_between(fwd.v.negative, fwd.i.negative);
            const double a_rev = angle_between(rev.v.negative, rev.i.negative);
            EXPECT_LT(a_fwd, 0.0);
            EXPECT_GT(a_rev, 0.0);
            EXPECT_NEAR(std::abs(wrap_deg(a_fwd - a_rev)), 180.0, 15.0);
        }
    }
}

TEST(OracleGrid, InverterZeroSequenceSeesTransformerOnly) {
    const SequenceNetwork net = frozen_gfm_network();
    for (const GridCase& c : oracle_grid()) {
        if (!involves_ground(c.spec.type) || c.spec.placement != Placement::forward) continue;
        const auto r = solve_sequence(net, c.spec).bus1;
        // v0 = -jX_T0 i0 at bus 1 for a fault in front of the relay
        EXPECT_NEAR(angle_between(r.v.zero, r.i.zero), -90.0, 1e-9) << c.label();
        expect_near(r.v.zero, -net.source.z.zero * r.i.zero, 1e-12);
    }
}

TEST(OracleGrid, FaultPointTransferInInductiveNetwork) {
    const SequenceNetwork net = inductive_network();
    for (const GridCase& c : oracle_grid()) {
        if (c.spec.placement != Placement::forward) continue;
        const NetworkSolution sol = solve_sequence(net, c.spec);
        if (std::abs(sol.fault_current.negative) > 1e-6) {
            EXPECT_NEAR(angle_between(sol.bus1.i.negative, sol.fault_current.negative), 0.0, 5.0) << c.label(); }
        if (std::abs(sol.fault_current.zero) > 1e-6) {
            EXPECT_NEAR(angle_between(sol.bus1.i.zero, sol.fault_current.zero), 0.0, 5.0) << c.label(); }
    }
}

TEST(Network, InvalidInputs) {
    EXPECT_THROW((FaultSpec{FaultType::AG, 1.5, 0.0, Placement::forward}.validate()), std::invalid_argument);
    EXPECT_THROW((FaultSpec{FaultType::AG, 0.5, -1.0, Placement::forward}.validate()), std::invalid_argument);
    EXPECT_THROW(parse_fault_type("xg"), std::invalid_argument);
    EXPECT_EQ(parse_fault_type("bcg"), FaultType::BCG);
    SequenceNetwork net = loaded_sg_network();
    net.line.positive = 0.0;
    EXPECT_ANY_THROW(solve_sequence(net, {FaultType::AG, 0.5, 0.0, Placement::forward}));
}

TEST(Network, RotationIndexMatchesFaultedPhases) {
    EXPECT_EQ(rotation_index(FaultType::AG), 0);
    EXPECT_EQ(rotation_index(FaultType::BG), 1);
    EXPECT_EQ(rotation_index(FaultType::CG), 2);
    EXPECT_EQ(rotation_index(FaultType::BC), 0);
    EXPECT_EQ(rotation_index(FaultType::CA), 1);
    EXPECT_EQ(rotation_index(FaultType::AB), 2);
}
