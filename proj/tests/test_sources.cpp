#include <numbers>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace gfmrelay;
using namespace gfmtest;

namespace {

void expect_near(Phasor a, Phasor b, double tol) { EXPECT_LT(std::abs(a - b), tol) << a << " vs " << b; }

const std::vector<ClcConfig>& all_clcs() {
    static const std::vector<ClcConfig> v = {CircularSaturation{},
                                             PrioritySaturation{},
                                             InstantaneousSaturation{},
                                             VirtualAdmittance{},
                                             AdaptiveVirtualImpedance{},
                                             AdaptiveVirtualImpedance{20.0, 1.1, 0.1, 1.2}};
    return v;
}

GfmModel model(const ClcConfig& clc) {
    GfmModel g;
    g.clc = clc;
    g.filter_in_network = default_filter_in_network(clc);
    return g;
}

struct Solved {
    GfmModel g;
    SequenceNetwork net;
    OperatingPoint op;
    FaultSolution fs;
};

Solved solve(const ClcConfig& clc, const FaultSpec& spec, double p = 1.0, double q = 0.0) {
    Solved s{model(clc), {}, {}, {}};
    s.net = make_gfm_network(CircuitParams{}, s.g, 0.0, 0.0);
    s.op = prefault_solve(s.g, s.net, p, q);
    s.fs = fault_fixed_point(s.g, s.net, spec, s.op);
    return s;
}

// Fundamental component of a clipped unit-frequency sinusoid by trapezoidal integration.
double numeric_describing_function(double amplitude, double clip) {
    const int n = 200000;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        const double x = std::clamp(amplitude * std::sin(t), -clip, clip);
        acc += x * std::sin(t);
    }
    return acc * 2.0 / n / amplitude;
}

}  // namespace

TEST(Prefault, ZeroFlowGivesOpenCircuitVoltage) {
    GfmModel g = model(AdaptiveVirtualImpedance{});
    const SequenceNetwork net = make_gfm_network(CircuitParams{}, g, 0.0, 0.0);
    const OperatingPoint op = prefault_solve(g, net, 0.0, 0.0);
    EXPECT_LT(std::abs(op.i_t), 1e-10);
    EXPECT_NEAR(op.e_mag, 1.0, 1e-10);
    EXPECT_NEAR(op.theta_deg, 0.0, 1e-8);
}

TEST(Prefault, ReproducesRequestedPower) {
    for (const ClcConfig& clc : all_clcs()) {
        GfmModel g = model(clc);
        const SequenceNetwork net = make_gfm_network(CircuitParams{}, g, 0.0, 0.0);
        const OperatingPoint op = prefault_solve(g, net, 1.0, 0.0);
        // forward re-simulation with the converged EMF
        SequenceNetwork check = net;
        check.source = {g.turns_ratio * op.e, effective_impedances(g, op.z_normal, op.z_normal)};
        const Phasor i = g.turns_ratio * solve_prefault(check).source_current.positive;
        const Phasor v = op.e - (op.z_normal + g.filter_drop_impedance()) * i;
        const Phasor s = v * std::conj(i);
        EXPECT_NEAR(s.real(), 1.0, 1e-8);
        EXPECT_NEAR(s.imag(), 0.0, 1e-8);
    }
}

TEST(Prefault, LosslessTwoBusClosedForm) {
    SgModel sg;
    SequenceNetwork net;
    net.source = {1.0, sg.impedance()};
    net.line = {{0.0, 0.3}, {0.0, 0.3}, {0.0, 0.9}};
    net.grid = {1.0, {{0.0, 0.1}, {0.0, 0.1}, {0.0, 0.3}}};
    for (auto [p, q] : {std::pair{1.0, 0.0}, std::pair{0.5, 0.2}, std::pair{0.8, -0.1}}) {
        const OperatingPoint op = prefault_solve(sg, net, p, q);
        const double x = 0.2 + 0.3 + 0.1, e = op.e_mag, th = std::arg(op.e);
        const double p_closed = e * std::sin(th) / x;
        const double i2 = std::norm(op.e - 1.0) / (x * x);
        const double q_closed = (e * e - e * std::cos(th)) / x - 0.2 * i2;
        EXPECT_NEAR(p_closed, p, 1e-8);
        EXPECT_NEAR(q_closed, q, 1e-8);
    }
}

TEST(ClcLaws, VirtualAdmittance) {
    const VirtualAdmittance va{0.01, 0.05, 20.0, 1.2};
    const ImpedanceLaw low = clc_virtual_admittance(va, 0.01);
    expect_near(low.z, {0.01, 0.05}, 1e-15);
    EXPECT_FALSE(low.reactance_limited);
    const ImpedanceLaw hi = clc_virtual_admittance(va, 0.5);
    EXPECT_NEAR(hi.z.imag(), 0.5 / (1.2 * std::sqrt(1.0 + 1.0 / 400.0)), 1e-12);
    EXPECT_NEAR(hi.z.imag(), 0.4161, 1e-4);
    EXPECT_NEAR(hi.z.real(), 0.0208, 1e-4);
    // one branch across a stiff 0.5 p.u. bus
    EXPECT_NEAR(0.5 / std::abs(hi.z), 1.2, 1.2 * 2e-3);
    for (double v = 0.0; v <= 1.0; v += 0.01) {
        const ImpedanceLaw law = clc_virtual_admittance(va, v);
        EXPECT_LE(v / std::abs(law.z), 1.2 * 1.01);
        if (law.resistance_limited) { EXPECT_NEAR(rad_to_deg(std::arg(law.z)), rad_to_deg(std::atan(20.0)), 0.5); }
    }
}

TEST(ClcLaws, AdaptiveVirtualImpedance) {
    EXPECT_EQ(clc_adaptive_impedance({2.0, 1.2, 20.0, 1.5}, 1.0), Phasor{});
    const Phasor z = clc_adaptive_impedance({1.0, 1.2, 20.0, 1.5}, 1.5);
    EXPECT_NEAR(z.imag(), 0.3, 1e-12);
    EXPECT_NEAR(z.real(), 0.015, 1e-12);
    EXPECT_NEAR(rad_to_deg(std::arg(clc_adaptive_impedance({2.0, 1.1, 20.0, 1.2}, 1.3))), 87.14, 0.01);
    EXPECT_NEAR(rad_to_deg(std::arg(clc_adaptive_impedance({2.0, 1.1, 0.1, 1.2}, 1.3))), 5.71, 0.01);
}

TEST(ClcLaws, SaturationReferenceExamples) {
    const Saturated none = saturate_reference(CircularSaturation{1.2}, {0.6, 0.6});
    expect_near(none.i_sat, {0.6, 0.6}, 1e-15);
    expect_near(none.sigma, 1.0, 1e-15);
    const Saturated c = saturate_reference(CircularSaturation{1.2}, {1.0, 1.0});
    EXPECT_NEAR(std::abs(c.i_sat), 1.2, 1e-12);
    EXPECT_NEAR(angle_deg(c.i_sat), 45.0, 1e-12);
    expect_near(c.sigma, 0.848528137, 1e-9);
    const Saturated p = saturate_reference(PrioritySaturation{1.2}, {1.5, 0.5});
    expect_near(p.i_sat, {1.2, 0.0}, 1e-12);
}

TEST(ClcLaws, CircularKeepsReferenceAngle) {
    for (int k = 0; k < 360; k += 7) {
        const Phasor ref = from_polar_deg(0.5 + 0.01 * k, k);
        EXPECT_NEAR(std::arg(saturate_reference(CircularSaturation{1.2}, ref).i_sat), std::arg(ref), 1e-12);
    }
}

TEST(ClcLaws, DescribingFunctionAgainstNumericIntegration) {
    EXPECT_NEAR(describing_function(2.0, 1.0), 0.609, 1e-3);
    EXPECT_NEAR(describing_function(2.0, 1.0), 2.0 / std::numbers::pi * (std::asin(0.5) + 0.5 * std::sqrt(0.75)),
                1e-15);
    for (double a : {1.0, 1.3, 2.0, 3.7, 10.0}) EXPECT_NEAR(describing_function(a, 1.0), numeric_describing_function(a, 1.0), 1e-6);
}

TEST(EffectiveImpedances, Examples) {
    GfmModel g;
    g.filter_in_network = false;
    expect_near(effective_impedances(g, 0.0, 0.0).negative, {0.0, 0.1}, 1e-15);
    g.turns_ratio = 33.0 / 220.0;
    const double n = g.turns_ratio;
    expect_near(effective_impedances(g, 0.0, {0.0, 0.4}).negative, {0.0, 0.4 * n * n + 0.1}, 1e-15);
    expect_near(effective_impedances(g, {0.3, 0.4}, {0.0, 0.4}).zero, {0.0, 0.1}, 1e-15);
}

TEST(FixedPoint, RemoteFaultLeavesLimitersInactive) {
    const FaultSpec remote{FaultType::AG, 1.0, 2000.0, Placement::forward};
    for (const ClcConfig& clc : all_clcs()) {
        const Solved s = solve(clc, remote, 0.5);
        ASSERT_FALSE(s.fs.clc.limiter_active) << clc_name(clc);
        expect_near(s.fs.clc.z_v1, s.op.z_normal, 1e-9);
        expect_near(s.fs.clc.z_v2, s.op.z_normal, 1e-9);
        SequenceNetwork lin = s.net;
        lin.source = {s.g.turns_ratio * s.op.e, effective_impedances(s.g, s.op.z_normal, s.op.z_normal)};
        const NetworkSolution ref = solve_sequence(lin, remote);
        for (Sequence q : kSequences) {
            expect_near(s.fs.network.bus1.i[q], ref.bus1.i[q], 1e-9);
            expect_near(s.fs.network.bus1.v[q], ref.bus1.v[q], 1e-9);
        }
    }
}

TEST(FixedPoint, ConvergesAndRespectsTheLimit) {
    for (const ClcConfig& clc : all_clcs())
        for (FaultType t : kAllFaultTypes)
            for (double m : {0.01, 0.5, 0.95})
                for (double rg : {0.0, 20.0}) {
                    const FaultSpec spec{t, m, rg, Placement::forward};
                    const Solved s = solve(clc, spec);
                    const std::string label = std::string(clc_name(clc)) + " " + std::string(to_string(t));
                    EXPECT_LT(s.fs.clc.residual, 1e-9) << label;
                    EXPECT_LE(s.fs.clc.iterations, 100u) << label;
                    if (s.fs.clc.limiter_active) {
                        EXPECT_LE(s.fs.clc.peak_current, current_limit(clc) * (1.0 + 1e-6)) << label; }
                }
}

TEST(FixedPoint, SaturationConsistency) {
    for (const ClcConfig& clc : all_clcs()) {
        if (!is_saturation(clc)) continue;
        for (FaultType t : {FaultType::AG, FaultType::BC, FaultType::BCG, FaultType::ABC}) {
            const Solved s = solve(clc, {t, 0.5, 0.0, Placement::forward});
            const ClcSolution& c = s.fs.clc;
            const double k = s.g.k_pv;
            const Phasor r1 = (s.op.e - c.v_t.positive) - (1.0 - c.sigma1) / (k * c.sigma1) * c.i_t.positive;
            const Phasor r2 = (0.0 - c.v_t.negative) - (1.0 - c.sigma2) / (k * c.sigma2) * c.i_t.negative;
            EXPECT_LT(std::abs(r1), 1e-8) << clc_name(clc);
            EXPECT_LT(std::abs(r2), 1e-8) << clc_name(clc);
        }
    }
}

TEST(FixedPoint, ImpedanceAngleForcedByXr) {
    for (const ClcConfig& clc : {ClcConfig{AdaptiveVirtualImpedance{}}, ClcConfig{VirtualAdmittance{}},
                                 ClcConfig{AdaptiveVirtualImpedance{20.0, 1.1, 0.1, 1.2}}}) {
        const double n = std::visit(
            [](const auto& c) {
                if constexpr (requires { c.n_xr; }) return c.n_xr;
                return 0.0;
            },
            clc);
        const Solved s = solve(clc, {FaultType::BCG, 0.5, 0.0, Placement::forward});
        ASSERT_TRUE(s.fs.clc.limiter_active);
        EXPECT_NEAR(rad_to_deg(std::arg(s.fs.clc.z_v2)), rad_to_deg(std::atan(n)), 0.1) << clc_name(clc);
        EXPECT_LE(s.fs.clc.peak_current, 1.2 * (1.0 + 1e-6));
    }
}

TEST(FixedPoint, CircularLimiterMakesNegativeSequenceResistive) {
    const Solved s = solve(CircularSaturation{}, {FaultType::AG, 0.5, 0.0, Placement::forward});
    EXPECT_NEAR(angle_deg(s.fs.clc.z_v2), 0.0, 5.0);
}

TEST(FixedPoint, HighXrAdaptiveImpedanceIsInductive) {
    const Solved s = solve(AdaptiveVirtualImpedance{}, {FaultType::BCG, 0.5, 0.0, Placement::forward});
    EXPECT_NEAR(angle_deg(-s.fs.clc.z_e.negative), -92.3, 5.0);
}

TEST(FixedPoint, DeterministicIterates) {
    const FaultSpec spec{FaultType::CAG, 0.3, 10.0, Placement::forward};
    for (const ClcConfig& clc : all_clcs()) {
        const Solved a = solve(clc, spec), b = solve(clc, spec);
        EXPECT_EQ(a.fs.clc.z_v1, b.fs.clc.z_v1);
        EXPECT_EQ(a.fs.clc.z_v2, b.fs.clc.z_v2);
        EXPECT_EQ(a.fs.clc.iterations, b.fs.clc.iterations);
        EXPECT_EQ(a.fs.clc.residual, b.fs.clc.residual);
    }
}

TEST(FixedPoint, IterationCapRaises) {
    const Solved s = solve(PrioritySaturation{}, {FaultType::BCG, 0.5, 0.0, Placement::forward});
    FixedPointOptions opt;
    opt.max_iterations = 1;
    EXPECT_THROW(fault_fixed_point(s.g, s.net, {FaultType::BCG, 0.5, 0.0, Placement::forward}, s.op, opt),
                 NoConvergence);
}

TEST(AdditionalImpedance, ColinearCurrentsAndInductiveImpedance) {
    GfmModel g = model(AdaptiveVirtualImpedance{});
    OperatingPoint op;
    op.network.bus1.i.positive = from_polar_deg(0.9, -20.0);
    ClcSolution sol;
    sol.z_v1 = {0.0, 0.35};
    NetworkSolution post;
    for (double k : {1.3, 2.0, 5.0}) {
        post.bus1.i.positive = k * op.network.bus1.i.positive;
        EXPECT_NEAR(angle_deg(z_ad(g, sol, post, op).z_ad), -90.0, 1e-9);
    }
    post.bus1.i.positive = op.network.bus1.i.positive;
    EXPECT_THROW(z_ad(g, sol, post, op), ZeroPhasor);
}

TEST(AdditionalImpedance, MachineRegimeIsInductive) {
    // |i1| >> |i_pre| with an inductive output impedance
    GfmModel g = model(AdaptiveVirtualImpedance{});
    OperatingPoint op;
    op.network.bus1.i.positive = from_polar_deg(0.05, 0.0);
    ClcSolution sol;
    sol.z_v1 = {0.01, 0.2};
    NetworkSolution post;
    post.bus1.i.positive = from_polar_deg(5.0, -80.0);
    EXPECT_NEAR(angle_deg(z_ad(g, sol, post, op).z_ad), -90.0, 5.0);
}

TEST(AdditionalImpedance, ResistiveGroundFaultNearBus1) {
    const Solved s = solve(AdaptiveVirtualImpedance{}, {FaultType::AG, 0.01, 30.0, Placement::forward});
    const AdditionalImpedance z = z_ad(s.g, s.fs.clc, s.fs.network, s.op);
    EXPECT_GT(std::abs(angle_deg(z.z_ad) + 90.0), 60.0);
    EXPECT_GT(angle_deg(z.z_ad), 0.0);
}
