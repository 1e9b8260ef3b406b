#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string_view>
#include <variant>

#include "gfmrelay/phasor.hpp"

namespace gfmrelay {

// Reference-current saturation laws. The voltage loop in front of them is a
// proportional gain with unity current feedforward.
struct CircularSaturation {
    double i_lim = 1.2;
};

// Active (d-axis) current keeps priority.
struct PrioritySaturation {
    double i_lim = 1.2;
};

// Hard per-phase clipping of the instantaneous reference, represented by its
// fundamental-frequency describing function.
struct InstantaneousSaturation {
    double clip_level = 1.2;  // peak, p.u.
    double i_lim = 1.2;
};

struct VirtualAdmittance {
    double r_vn = 0.01;  // p.u.
    double x_vn = 0.05;  // omega1 * L_vN, p.u.
    double n_xr = 20.0;
    double i_lim = 1.2;
};

struct AdaptiveVirtualImpedance {
    double k_x = 20.0;   // p.u. reactance per p.u. current above threshold
    double i_th = 1.1;
    double n_xr = 20.0;
    double i_lim = 1.2;
};

using ClcConfig = std::variant<CircularSaturation, PrioritySaturation, InstantaneousSaturation,
                               VirtualAdmittance, AdaptiveVirtualImpedance>;

inline std::string_view clc_name(const ClcConfig& cfg) {
    static constexpr std::string_view names[] = {"circular", "priority", "instantaneous",
                                                 "virtual-admittance", "adaptive-vi"};
    return names[cfg.index()];
}

inline double current_limit(const ClcConfig& cfg) {
    return std::visit([](const auto& c) { return c.i_lim; }, cfg);
}

inline bool is_saturation(const ClcConfig& cfg) {
    return std::holds_alternative<CircularSaturation>(cfg) || std::holds_alternative<PrioritySaturation>(cfg) ||
           std::holds_alternative<InstantaneousSaturation>(cfg);
}

// Only the direct virtual-impedance variant keeps the filter inside the sequence network.
inline bool default_filter_in_network(const ClcConfig& cfg) {
    return std::holds_alternative<AdaptiveVirtualImpedance>(cfg);
}

// Output impedance during normal operation (no limit active).
inline Phasor normal_impedance(const ClcConfig& cfg) {
    if (const auto* va = std::get_if<VirtualAdmittance>(&cfg)) return {va->r_vn, va->x_vn};
    return {};
}

inline void validate(const ClcConfig& cfg) {
    const double i_lim = current_limit(cfg);
    if (!(i_lim >= 1.0)) throw std::invalid_argument("current limit must be at least 1 p.u.");
    if (const auto* c = std::get_if<InstantaneousSaturation>(&cfg)) {
        if (!(c->clip_level > 0.0)) throw std::invalid_argument("clip level must be positive");
    } else if (const auto* va = std::get_if<VirtualAdmittance>(&cfg)) {
        if (!(va->n_xr > 0.0)) throw std::invalid_argument("X/R ratio must be positive");
        if (!(va->r_vn >= 0.0) || !(va->x_vn > 0.0))
            throw std::invalid_argument("nominal virtual admittance must have R >= 0 and X > 0");
    } else if (const auto* vi = std::get_if<AdaptiveVirtualImpedance>(&cfg)) {
        if (!(vi->n_xr > 0.0)) throw std::invalid_argument("X/R ratio must be positive");
        if (!(vi->k_x > 0.0)) throw std::invalid_argument("K_X must be positive");
        if (!(vi->i_th < vi->i_lim)) throw std::invalid_argument("current threshold must be below the limit");
        if (!(vi->i_th > 0.0)) throw std::invalid_argument("current threshold must be positive");
    }
}

struct ImpedanceLaw {
    Phasor z{};
    bool reactance_limited = false;   // voltage-dependent branch of the reactance max won
    bool resistance_limited = false;  // X/R branch of the resistance max won
};

// v_t: magnitude of the voltage across the virtual element.
inline ImpedanceLaw clc_virtual_admittance(const VirtualAdmittance& cfg, double v_t) {
    const double x_dyn = v_t / (cfg.i_lim * std::sqrt(1.0 + 1.0 / (cfg.n_xr * cfg.n_xr)));
    ImpedanceLaw out;
    const double x = std::max(cfg.x_vn, x_dyn);
    out.reactance_limited = x_dyn > cfg.x_vn;
    const double r = std::max(cfg.r_vn, x / cfg.n_xr);
    out.resistance_limited = x / cfg.n_xr > cfg.r_vn;
    out.z = {r, x};
    return out;
}

inline Phasor clc_adaptive_impedance(const AdaptiveVirtualImpedance& cfg, double i_t) {
    if (i_t < cfg.i_th) return {};
    const double x = cfg.k_x * (i_t - cfg.i_th);
    return {x / cfg.n_xr, x};
}

struct Saturated {
    Phasor i_sat{};
    Phasor sigma{1.0, 0.0};
};

inline Saturated make_saturated(Phasor i_ref, Phasor i_sat) {
    return {i_sat, std::abs(i_ref) > 0.0 ? i_sat / i_ref : Phasor{1.0, 0.0}};
}

// i_ref in a dq frame: real part d, imaginary part q.
inline Saturated saturate_reference(const CircularSaturation& cfg, Phasor i_ref) {
    const double mag = std::abs(i_ref);
    if (mag <= cfg.i_lim) return {i_ref, 1.0};
    const double k = cfg.i_lim / mag;
    return {i_ref * k, k};
}

inline Phasor priority_clamp(Phasor i_ref, double budget) {
    const double d = std::clamp(i_ref.real(), -budget, budget);
    const double q_max = std::sqrt(std::max(0.0, budget * budget - d * d));
    const double q = std::clamp(i_ref.imag(), -q_max, q_max);
    return {d, q};
}

inline Saturated saturate_reference(const PrioritySaturation& cfg, Phasor i_ref) {
    if (std::abs(i_ref) <= cfg.i_lim) return {i_ref, 1.0};
    return make_saturated(i_ref, priority_clamp(i_ref, cfg.i_lim));
}

// Fundamental gain of a sinusoid of peak amplitude a clipped at +-clip.
inline double describing_function(double amplitude, double clip) {
    if (amplitude <= clip) return 1.0;
    const double r = clip / amplitude;
    return 2.0 / std::numbers::pi * (std::asin(r) + r * std::sqrt(1.0 - r * r));
}

// Single balanced channel: all three phases share the reference amplitude.
inline Saturated saturate_reference(const InstantaneousSaturation& cfg, Phasor i_ref) {
    return make_saturated(i_ref, i_ref * describing_function(std::abs(i_ref), cfg.clip_level));
}

// Combined limiting of positive- and negative-sequence references.
struct LimitedReferences {
    Phasor i1{};
    Phasor i2{};
    bool active = false;
};

// Both channels scaled by one real factor so the largest phase current meets the limit.
inline LimitedReferences limit_references(const CircularSaturation& cfg, Phasor i1, Phasor i2, double) {
    const double peak = peak_phase_magnitude({i1, i2, 0.0});
    if (peak <= cfg.i_lim) return {i1, i2, false};
    const double k = cfg.i_lim / peak;
    return {i1 * k, i2 * k, true};
}

// The limit is shared between the channels in proportion to their magnitudes;
// each channel then keeps its d component first. Positive sequence uses the
// d axis at +theta, negative sequence at -theta.
inline LimitedReferences limit_references(const PrioritySaturation& cfg, Phasor i1, Phasor i2, double theta) {
    const double total = std::abs(i1) + std::abs(i2);
    if (total <= cfg.i_lim) return {i1, i2, false};
    const double share = cfg.i_lim / total;
    const Phasor to_dq1 = std::polar(1.0, -theta);
    const Phasor to_dq2 = std::polar(1.0, theta);
    const Phasor s1 = priority_clamp(i1 * to_dq1, share * std::abs(i1)) / to_dq1;
    const Phasor s2 = priority_clamp(i2 * to_dq2, share * std::abs(i2)) / to_dq2;
    return {s1, s2, true};
}

// Per-phase describing function, zero sequence dropped (three-wire converter),
// then a common rescale if the largest phase still exceeds the limit.
inline LimitedReferences limit_references(const InstantaneousSaturation& cfg, Phasor i1, Phasor i2, double) {
    PhaseTriple ph = inverse_fortescue({i1, i2, 0.0});
    bool active = false;
    for (int p = 0; p < 3; ++p) {
        const double g = describing_function(std::abs(ph[p]), cfg.clip_level);
        if (g < 1.0) active = true;
        ph[p] *= g;
    }
    SequenceTriple s = fortescue(ph);
    s.zero = 0.0;
    const double peak = peak_phase_magnitude(s);
    if (peak > cfg.i_lim) {
        s = Phasor(cfg.i_lim / peak) * s;
        active = true;
    }
    return {s.positive, s.negative, active};
}

}  // namespace gfmrelay
