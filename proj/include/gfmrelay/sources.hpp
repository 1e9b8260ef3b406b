#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <variant>

#include <Eigen/Dense>

#include "gfmrelay/circuit.hpp"
#include "gfmrelay/clc.hpp"
#include "gfmrelay/network.hpp"

namespace gfmrelay {

// Synchronous generator: constant EMF behind sequence reactances, connected
// to bus 1 through a short collection line.
struct SgModel {
    double x1 = 0.2;
    double x2 = 0.2;
    double x0 = 0.3;
    double collection_km = 10.0;

    SequenceTriple impedance() const { return {{0.0, x1}, {0.0, x2}, {0.0, x0}}; }

    void validate() const {
        if (!(x1 > 0.0) || !(x2 > 0.0) || !(x0 > 0.0))
            throw std::invalid_argument("generator reactances must be positive");
        if (!(collection_km > 0.0)) throw std::invalid_argument("collection length must be positive");
    }
};

// Grid-forming inverter. All reactances are p.u. on the inverter base; the
// transformer is delta/grounded-wye so the zero sequence sees only X_T0.
struct GfmModel {
    double x_f = 0.15;
    double x_t1 = 0.1;
    double x_t0 = 0.1;
    double turns_ratio = 1.0;  // off-nominal ratio between the inverter and grid bases
    double k_pv = 5.0;         // voltage-loop proportional gain
    ClcConfig clc = AdaptiveVirtualImpedance{};
    bool filter_in_network = true;

    double i_lim() const { return current_limit(clc); }
    Phasor filter_drop_impedance() const { return filter_in_network ? Phasor{0.0, x_f} : Phasor{}; }

    void validate() const {
        gfmrelay::validate(clc);
        if (!(x_f >= 0.0) || !(x_t1 > 0.0) || !(x_t0 > 0.0))
            throw std::invalid_argument("filter and transformer reactances must be positive");
        if (!(turns_ratio > 0.0)) throw std::invalid_argument("turns ratio must be positive");
        if (!(k_pv > 0.0)) throw std::invalid_argument("voltage-loop gain must be positive");
    }
};

inline SequenceTriple effective_impedances(const GfmModel& g, Phasor z_v1, Phasor z_v2) {
    const double n2 = g.turns_ratio * g.turns_ratio;
    const Phasor f = g.filter_drop_impedance();
    return {n2 * (z_v1 + f) + Phasor{0.0, g.x_t1}, n2 * (z_v2 + f) + Phasor{0.0, g.x_t1}, {0.0, g.x_t0}};
}

inline SequenceNetwork make_sg_network(const CircuitParams& c, const SgModel& sg, Phasor emf = 1.0) {
    return make_network(c, {emf, sg.impedance()}, c.line_segment_pu(sg.collection_km));
}

// emf is the inverter-side internal voltage; the network sees n * emf.
inline SequenceNetwork make_gfm_network(const CircuitParams& c, const GfmModel& g, Phasor z_v1, Phasor z_v2,
                                        Phasor emf = 1.0) {
    return make_network(c, {g.turns_ratio * emf, effective_impedances(g, z_v1, z_v2)});
}

struct OperatingPoint {
    Phasor e{};              // internal EMF, source side of the turns ratio
    double e_mag = 0.0;
    double theta_deg = 0.0;
    Phasor v_t{};            // measuring point: POC for the inverter, terminal for the machine
    Phasor i_t{};
    double p = 0.0;
    double q = 0.0;
    Phasor z_normal{};       // inverter output impedance in normal operation
    NetworkSolution network; // pre-fault solution of the source network
    std::size_t iterations = 0;
    double mismatch = 0.0;
};

namespace detail {

// Newton on (E, theta) so that v_t * conj(i_t) = P + jQ. The source branch of
// `net` is the normal-operation impedance; z_internal is the drop between the
// EMF and the measuring point on the source side; n scales EMF and current.
inline OperatingPoint solve_power_flow(SequenceNetwork net, Phasor z_internal, double n, double p_ref,
                                       double q_ref) {
    const Phasor grid_emf = net.grid.emf;
    net.source.emf = 1.0;
    net.grid.emf = 0.0;
    const Phasor g = solve_prefault(net).source_current.positive;
    net.source.emf = 0.0;
    net.grid.emf = grid_emf;
    const Phasor h = solve_prefault(net).source_current.positive;
    const Phasor a = n * n * g;
    const Phasor b = n * h;

    double mag = 1.0, theta = 0.0;
    double mismatch = 0.0;
    std::size_t it = 0;
    constexpr std::size_t kMaxSteps = 50;
    for (;; ++it) {
        const Phasor e = std::polar(mag, theta);
        const Phasor i = a * e + b;
        const Phasor v = e - z_internal * i;
        const Phasor s = v * std::conj(i);
        const Eigen::Vector2d f(s.real() - p_ref, s.imag() - q_ref);
        mismatch = f.cwiseAbs().maxCoeff();
        if (mismatch < 1e-12) break;
        if (it == kMaxSteps || !std::isfinite(mismatch))
            throw NoConvergence("pre-fault power flow did not converge", it, mismatch);
        auto ds = [&](Phasor de) { return (de - z_internal * a * de) * std::conj(i) + v * std::conj(a * de); };
        const Phasor ds_mag = ds(std::polar(1.0, theta));
        const Phasor ds_theta = ds(Phasor{0.0, 1.0} * e);
        Eigen::Matrix2d j;
        j << ds_mag.real(), ds_theta.real(), ds_mag.imag(), ds_theta.imag();
        const Eigen::Vector2d step = j.fullPivLu().solve(-f);
        if (!step.allFinite()) throw NoConvergence("pre-fault Jacobian is singular", it, mismatch);
        mag += step(0);
        theta += step(1);
        if (mag <= 0.0) mag = 0.5 * (mag - step(0));
    }

    OperatingPoint op;
    op.e = std::polar(mag, theta);
    op.e_mag = mag;
    op.theta_deg = angle_deg(op.e);
    net.source.emf = n * op.e;
    op.network = solve_prefault(net);
    op.i_t = n * op.network.source_current.positive;
    op.v_t = op.e - z_internal * op.i_t;
    const Phasor s = op.v_t * std::conj(op.i_t);
    op.p = s.real();
    op.q = s.imag();
    op.iterations = it;
    op.mismatch = mismatch;
    return op;
}

}  // namespace detail

// net supplies line, grid and collection data; its source branch is replaced
// by the inverter's normal-operation impedance.
inline OperatingPoint prefault_solve(const GfmModel& g, SequenceNetwork net, double p_ref, double q_ref) {
    g.validate();
    const Phasor z_n = normal_impedance(g.clc);
    net.source.z = effective_impedances(g, z_n, z_n);
    OperatingPoint op = detail::solve_power_flow(net, z_n + g.filter_drop_impedance(), g.turns_ratio, p_ref, q_ref);
    op.z_normal = z_n;
    return op;
}

inline OperatingPoint prefault_solve(const SgModel& sg, SequenceNetwork net, double p_ref, double q_ref) {
    sg.validate();
    net.source.z = sg.impedance();
    return detail::solve_power_flow(net, net.source.z.positive, 1.0, p_ref, q_ref);
}

struct ClcSolution {
    Phasor z_v1{};
    Phasor z_v2{};
    Phasor sigma1{1.0, 0.0};  // saturation modes only
    Phasor sigma2{1.0, 0.0};
    SequenceTriple i_t{};     // inverter side, at the POC
    SequenceTriple v_t{};
    SequenceTriple z_e{};
    std::size_t iterations = 0;
    double residual = 0.0;
    bool limiter_active = false;
    double peak_current = 0.0;
};

struct FaultSolution {
    ClcSolution clc;
    NetworkSolution network;
};

struct FixedPointOptions {
    double tolerance = 1e-9;
    std::size_t max_iterations = 100;
    double damping = 0.5;
};

namespace detail {

using State = Eigen::Vector4d;

inline State pack(Phasor z1, Phasor z2) { return {z1.real(), z1.imag(), z2.real(), z2.imag()}; }

struct FixedPointResult {
    State x;
    std::size_t iterations;
    double residual;
};

// One evaluation of the fixed-point map: the updated state and a merit vector
// that vanishes exactly at fixed points.
struct MapValue {
    State update;
    State merit;
};

// Solves x = phi(x).update. Each step tries a Newton direction on the merit
// vector with a forward-difference Jacobian and backtracking; if no decrease is
// found it takes the damped step x + damping * (update - x). Convergence is
// judged on the update norm |update - x|.
template <class Phi>
FixedPointResult solve_fixed_point(Phi&& phi, State x, const FixedPointOptions& opt) {
    auto eval = [&](const State& s, MapValue& out) -> bool {
        try {
            out = phi(s);
        } catch (const SingularNetwork&) {
            return false;
        }
        return out.update.allFinite() && out.merit.allFinite();
    };
    auto norm = [](const State& v) { return v.cwiseAbs().maxCoeff(); };
    MapValue cur;
    if (!eval(x, cur)) throw SingularNetwork("fixed point: initial iterate is not solvable");
    double r = norm(cur.update - x);
    double merit = norm(cur.merit);
    std::deque<State> recent{x};
    double best = r;
    std::size_t stalled = 0;

    for (std::size_t it = 0;; ++it) {
        if (r < opt.tolerance) return {x, it, r};
        if (it == opt.max_iterations)
            throw NoConvergence("fixed point reached the iteration cap", it, r);

        Eigen::Matrix4d jac;
        bool jac_ok = true;
        for (int k = 0; k < 4 && jac_ok; ++k) {
            State xp = x;
            const double h = 1e-7 * std::max(1.0, std::abs(x(k)));
            xp(k) += h;
            MapValue vp;
            jac_ok = eval(xp, vp);
            if (jac_ok) jac.col(k) = (vp.merit - cur.merit) / h;
        }

        State x_next = x;
        MapValue next = cur;
        bool accepted = false;
        if (jac_ok) {
            Eigen::FullPivLU<Eigen::Matrix4d> lu(jac);
            if (lu.isInvertible()) {
                const State d = lu.solve(-cur.merit);
                double t = 1.0;
                for (int ls = 0; ls < 30 && !accepted; ++ls, t *= 0.5) {
                    const State trial = x + t * d;
                    MapValue vt;
                    if (eval(trial, vt) && norm(vt.merit) <= (1.0 - 1e-4 * t) * merit) {
                        x_next = trial;
                        next = vt;
                        accepted = true;
                    }
                }
            }
        }
        if (!accepted) {
            x_next = x + opt.damping * (cur.update - x);
            if (!eval(x_next, next)) throw SingularNetwork("fixed point: damped iterate is not solvable");
        }

        x = x_next;
        cur = next;
        r = norm(cur.update - x);
        merit = norm(cur.merit);

        recent.push_back(x);
        if (recent.size() > 3) recent.pop_front();
        if (r < best) {
            best = r;
            stalled = 0;
        } else if (++stalled >= 8 && recent.size() == 3) {
            const double step = (recent[2] - recent[1]).norm();
            const double back = (recent[2] - recent[0]).norm();
            if (step > 0.0 && back < 1e-3 * step)
                throw OscillationDetected("fixed point iterates alternate between two states", it + 1, r);
        }
    }
}

struct Evaluation {
    NetworkSolution network;
    SequenceTriple i_t;
    SequenceTriple v_t;
    Phasor z1{}, z2{};
    Phasor sigma1{1.0, 0.0}, sigma2{1.0, 0.0};
    Phasor merit1{}, merit2{};
    bool active = false;
};

inline Evaluation evaluate_clc(const GfmModel& g, const SequenceNetwork& base, const FaultSpec& spec,
                               const OperatingPoint& op, Phasor z_v1, Phasor z_v2) {
    SequenceNetwork net = base;
    net.source = {g.turns_ratio * op.e, effective_impedances(g, z_v1, z_v2)};
    Evaluation ev;
    ev.network = solve_sequence(net, spec);
    const double n = g.turns_ratio;
    ev.i_t = {n * ev.network.source_current.positive, n * ev.network.source_current.negative, 0.0};
    const Phasor f = g.filter_drop_impedance();
    ev.v_t = {op.e - (z_v1 + f) * ev.i_t.positive, -(z_v2 + f) * ev.i_t.negative, 0.0};
    const Phasor dv1 = z_v1 * ev.i_t.positive;
    const Phasor dv2 = z_v2 * ev.i_t.negative;
    const double theta = std::arg(op.e);

    std::visit(
        [&](const auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, VirtualAdmittance>) {
                const ImpedanceLaw law = clc_virtual_admittance(cfg, peak_phase_magnitude({dv1, dv2, 0.0}));
                ev.z1 = ev.z2 = law.z;
                // relative update: the absolute one also vanishes as Z_v -> 0
                auto relative = [](Phasor z_new, Phasor z) {
                    return std::abs(z) > 0.0 ? (z_new - z) / std::abs(z) : z_new - z;
                };
                ev.merit1 = relative(ev.z1, z_v1);
                ev.merit2 = relative(ev.z2, z_v2);
                ev.active = law.reactance_limited;
            } else if constexpr (std::is_same_v<T, AdaptiveVirtualImpedance>) {
                const double peak = peak_phase_magnitude(ev.i_t);
                ev.z1 = ev.z2 = clc_adaptive_impedance(cfg, peak);
                ev.merit1 = ev.z1 - z_v1;
                ev.merit2 = ev.z2 - z_v2;
                ev.active = peak >= cfg.i_th;
            } else {
                const Phasor r1 = g.k_pv * dv1 + ev.i_t.positive;
                const Phasor r2 = g.k_pv * dv2 + ev.i_t.negative;
                const LimitedReferences lim = limit_references(cfg, r1, r2, theta);
                ev.sigma1 = std::abs(r1) > kMagnitudeFloor ? lim.i1 / r1 : Phasor{1.0, 0.0};
                ev.sigma2 = std::abs(r2) > kMagnitudeFloor ? lim.i2 / r2 : ev.sigma1;
                ev.z1 = (1.0 - ev.sigma1) / (g.k_pv * ev.sigma1);
                ev.z2 = (1.0 - ev.sigma2) / (g.k_pv * ev.sigma2);
                // zero exactly when the injected current equals the limited reference;
                // unlike z - z_v it has no spurious root where the reference vanishes
                ev.merit1 = ev.sigma1 * (1.0 + g.k_pv * z_v1) - 1.0;
                ev.merit2 = ev.sigma2 * (1.0 + g.k_pv * z_v2) - 1.0;
                ev.active = lim.active;
            }
        },
        g.clc);
    return ev;
}

// Starting point. Saturation modes that are active at zero output impedance
// start from the real impedance that brings the peak phase current to the
// limit (found by bisection); all other modes start from normal operation.
inline State initial_state(const GfmModel& g, const SequenceNetwork& net, const FaultSpec& spec,
                           const OperatingPoint& op) {
    const State normal = pack(op.z_normal, op.z_normal);
    if (!is_saturation(g.clc)) return normal;
    if (!evaluate_clc(g, net, spec, op, 0.0, 0.0).active) return normal;
    auto peak_at = [&](double r) { return peak_phase_magnitude(evaluate_clc(g, net, spec, op, r, r).i_t); };
    const double limit = g.i_lim();
    double lo = 0.0, hi = 0.1;
    while (peak_at(hi) > limit) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) return normal;
    }
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (peak_at(mid) > limit ? lo : hi) = mid;
    }
    return pack(hi, hi);
}

}  // namespace detail

// Nonlinear fault equilibrium of the inverter: the output impedances Z_v1, Z_v2
// are iterated until the CLC law reproduces them from the network solution.
inline FaultSolution fault_fixed_point(const GfmModel& g, const SequenceNetwork& net, const FaultSpec& spec,
                                       const OperatingPoint& op, const FixedPointOptions& opt = {}) {
    g.validate();
    spec.validate();
    auto phi = [&](const detail::State& x) {
        const detail::Evaluation ev =
            detail::evaluate_clc(g, net, spec, op, {x(0), x(1)}, {x(2), x(3)});
        return detail::MapValue{detail::pack(ev.z1, ev.z2), detail::pack(ev.merit1, ev.merit2)};
    };
    const detail::FixedPointResult fp =
        detail::solve_fixed_point(phi, detail::initial_state(g, net, spec, op), opt);

    const Phasor z1{fp.x(0), fp.x(1)}, z2{fp.x(2), fp.x(3)};
    const detail::Evaluation ev = detail::evaluate_clc(g, net, spec, op, z1, z2);
    FaultSolution out;
    out.network = ev.network;
    ClcSolution& c = out.clc;
    c.z_v1 = z1;
    c.z_v2 = z2;
    c.sigma1 = ev.sigma1;
    c.sigma2 = ev.sigma2;
    c.i_t = ev.i_t;
    c.v_t = ev.v_t;
    c.z_e = effective_impedances(g, z1, z2);
    c.iterations = fp.iterations;
    c.residual = fp.residual;
    c.limiter_active = ev.active;
    c.peak_current = peak_phase_magnitude(ev.i_t);
    return out;
}

struct AdditionalImpedance {
    Phasor z_ad{};
    Phasor dv_over_di{};  // Z_ad minus the fixed filter and transformer terms
};

// Z_ad = -n^2 (i1 Z_v1 - i_pre1 Z_vN) / (i1 - i_pre1) from bus-1 positive-sequence
// currents. With Z_vN = 0 this is the usual -n^2 i1 Z_v1 / delta-i1.
inline AdditionalImpedance z_ad(const GfmModel& g, const ClcSolution& sol, const NetworkSolution& post,
                                const OperatingPoint& op, double floor = kMagnitudeFloor) {
    const Phasor i1 = post.bus1.i.positive;
    const Phasor i_pre = op.network.bus1.i.positive;
    const Phasor di = i1 - i_pre;
    if (std::abs(di) < floor) throw ZeroPhasor("z_ad: incremental current below floor");
    const double n2 = g.turns_ratio * g.turns_ratio;
    AdditionalImpedance out;
    out.z_ad = -n2 * (i1 * sol.z_v1 - i_pre * op.z_normal) / di;
    out.dv_over_di = out.z_ad - (n2 * g.filter_drop_impedance() + Phasor{0.0, g.x_t1});
    return out;
}

}  // namespace gfmrelay
