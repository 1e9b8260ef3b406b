#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "gfmrelay/network.hpp"

namespace gfmrelay {

struct RelayReading {
    SequenceTriple v{};
    SequenceTriple i{};
    SequenceTriple v_pre{};
    SequenceTriple i_pre{};

    Phasor dv1() const { return v.positive - v_pre.positive; }
    Phasor di1() const { return i.positive - i_pre.positive; }

    static RelayReading from(const BusReading& post, const BusReading& pre) {
        return {post.v, post.i, pre.v, pre.i};
    }
};

struct DirectionalConfig {
    double phi_non = 45.0;  // blocking wedge between the zones, degrees
    double forward_center = -90.0;
    double reverse_center = 90.0;
    double floor = 0.02;

    void validate() const {
        if (!(phi_non >= 30.0 && phi_non <= 60.0))
            throw std::invalid_argument("phi_non must lie in [30, 60] degrees");
        if (!(floor > 0.0)) throw std::invalid_argument("directional floor must be positive");
    }
};

struct PhaseSelectionConfig {
    double dd21_band = 15.0;
    double d20_band = 30.0;
    double floor = 0.05;

    void validate() const {
        if (!(dd21_band > 0.0) || !(d20_band > 0.0)) throw std::invalid_argument("band half-widths must be positive");
        if (!(floor > 0.0)) throw std::invalid_argument("phase selection floor must be positive");
    }
};

enum class Direction { forward, reverse, indeterminate };

inline std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::forward: return "Forward";
        case Direction::reverse: return "Reverse";
        case Direction::indeterminate: return "Indeterminate";
    }
    return "?";
}

struct DirectionalDecision {
    Direction direction = Direction::indeterminate;
    std::optional<double> angle;  // absent when an operand is below the floor
};

// Unknown is represented by an empty fault type.
struct PhaseSelection {
    std::optional<FaultType> fault;
    std::optional<double> dd21;
    std::optional<double> d20;
};

inline std::string_view label(const PhaseSelection& p) { return p.fault ? to_string(*p.fault) : "Unknown"; }

inline Direction classify_direction(double angle, const DirectionalConfig& cfg) {
    const double half = 90.0 - cfg.phi_non;
    if (std::abs(wrap_deg(angle - cfg.forward_center)) <= half) return Direction::forward;
    if (std::abs(wrap_deg(angle - cfg.reverse_center)) <= half) return Direction::reverse;
    return Direction::indeterminate;
}

inline DirectionalDecision directional_decision(Phasor v, Phasor i, const DirectionalConfig& cfg) {
    if (std::abs(v) < cfg.floor || std::abs(i) < cfg.floor) return {};
    const double a = angle_between(v, i);
    return {classify_direction(a, cfg), a};
}

inline DirectionalDecision directional_negative(const RelayReading& r, const DirectionalConfig& cfg = {}) {
    return directional_decision(r.v.negative, r.i.negative, cfg);
}

inline DirectionalDecision directional_zero(const RelayReading& r, const DirectionalConfig& cfg = {}) {
    return directional_decision(r.v.zero, r.i.zero, cfg);
}

inline DirectionalDecision directional_incremental(const RelayReading& r, const DirectionalConfig& cfg = {}) {
    return directional_decision(r.dv1(), r.di1(), cfg);
}

struct SelectionCenter {
    FaultType fault;
    double dd21;
    double d20;
};

// Centers for dd21 = angle(i2 / delta-i1) and d20 = angle(i0 / i2), alpha = 1 at +120.
inline constexpr std::array<SelectionCenter, 6> kGroundFaultCenters = {{
    {FaultType::AG, 0.0, 0.0},
    {FaultType::BG, 120.0, 120.0},
    {FaultType::CG, -120.0, -120.0},
    {FaultType::BCG, 180.0, 0.0},
    {FaultType::CAG, -60.0, 120.0},
    {FaultType::ABG, 60.0, -120.0},
}};

inline constexpr std::array<SelectionCenter, 3> kPhaseFaultCenters = {{
    {FaultType::AB, 60.0, 0.0},
    {FaultType::BC, 180.0, 0.0},
    {FaultType::CA, -60.0, 0.0},
}};

inline std::optional<SelectionCenter> canonical_center(FaultType t) {
    for (const auto& c : kGroundFaultCenters)
        if (c.fault == t) return c;
    for (const auto& c : kPhaseFaultCenters)
        if (c.fault == t) return c;
    return std::nullopt;
}

inline bool within_band(double angle, double center, double band) {
    return std::abs(wrap_deg(angle - center)) <= band;
}

// Single-angle view of the ground-fault table: the fault types whose d20 band
// contains the angle, joined with '|', or "Unknown".
inline std::string d20_candidates(std::optional<double> d20, const PhaseSelectionConfig& cfg = {}) {
    std::string out;
    if (d20)
        for (const auto& c : kGroundFaultCenters)
            if (within_band(*d20, c.d20, cfg.d20_band)) {
                if (!out.empty()) out += '|';
                out += to_string(c.fault);
            }
    return out.empty() ? "Unknown" : out;
}

inline PhaseSelection phase_select(const RelayReading& r, const PhaseSelectionConfig& cfg = {}) {
    PhaseSelection out;
    const Phasor i2 = r.i.negative, i0 = r.i.zero, di1 = r.di1();
    if (std::abs(i2) < cfg.floor) {
        out.fault = FaultType::ABC;
        return out;
    }
    if (std::abs(di1) < cfg.floor) return out;
    out.dd21 = angle_between(i2, di1);
    if (std::abs(i0) < cfg.floor) {
        for (const auto& c : kPhaseFaultCenters)
            if (within_band(*out.dd21, c.dd21, cfg.dd21_band)) out.fault = c.fault;
        return out;
    }
    out.d20 = angle_between(i0, i2);
    for (const auto& c : kGroundFaultCenters)
        if (within_band(*out.dd21, c.dd21, cfg.dd21_band) && within_band(*out.d20, c.d20, cfg.d20_band)) out.fault = c.fault;
    return out;
}

}  // namespace gfmrelay
