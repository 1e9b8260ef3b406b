#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "gfmrelay/errors.hpp"

namespace gfmrelay {

using Phasor = std::complex<double>;

// Below this magnitude (p.u.) a sequence quantity is treated as absent.
inline constexpr double kMagnitudeFloor = 1e-9;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Normalizes an angle to (-180, 180].
inline double wrap_deg(double deg) {
    double d = std::fmod(deg + 180.0, 360.0);
    if (d <= 0.0) d += 360.0;
    return d - 180.0;
}

inline double magnitude(Phasor z) { return std::abs(z); }
inline double angle_deg(Phasor z) { return wrap_deg(rad_to_deg(std::arg(z))); }
inline Phasor from_polar_deg(double mag, double deg) { return std::polar(mag, deg_to_rad(deg)); }

// alpha = 1 at +120 degrees, positive sequence rotates a -> b -> c.
inline const Phasor kAlpha = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
inline const Phasor kAlpha2 = kAlpha * kAlpha;

enum class Sequence { positive, negative, zero };

struct SequenceTriple {
    Phasor positive{};
    Phasor negative{};
    Phasor zero{};

    Phasor& operator[](Sequence s) {
        return s == Sequence::positive ? positive : s == Sequence::negative ? negative : zero;
    }
    const Phasor& operator[](Sequence s) const {
        return s == Sequence::positive ? positive : s == Sequence::negative ? negative : zero;
    }
    friend SequenceTriple operator+(const SequenceTriple& x, const SequenceTriple& y) {
        return {x.positive + y.positive, x.negative + y.negative, x.zero + y.zero};
    }
    friend SequenceTriple operator-(const SequenceTriple& x, const SequenceTriple& y) {
        return {x.positive - y.positive, x.negative - y.negative, x.zero - y.zero};
    }
    friend SequenceTriple operator*(Phasor k, const SequenceTriple& x) {
        return {k * x.positive, k * x.negative, k * x.zero};
    }
};

inline constexpr Sequence kSequences[] = {Sequence::positive, Sequence::negative, Sequence::zero};

struct PhaseTriple {
    Phasor a{};
    Phasor b{};
    Phasor c{};

    Phasor& operator[](int p) { return p == 0 ? a : p == 1 ? b : c; }
    const Phasor& operator[](int p) const { return p == 0 ? a : p == 1 ? b : c; }
    friend PhaseTriple operator+(const PhaseTriple& x, const PhaseTriple& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c};
    }
    friend PhaseTriple operator-(const PhaseTriple& x, const PhaseTriple& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c};
    }
    friend PhaseTriple operator*(Phasor k, const PhaseTriple& x) { return {k * x.a, k * x.b, k * x.c}; }
};

inline SequenceTriple fortescue(const PhaseTriple& p) {
    return {(p.a + kAlpha * p.b + kAlpha2 * p.c) / 3.0,
            (p.a + kAlpha2 * p.b + kAlpha * p.c) / 3.0,
            (p.a + p.b + p.c) / 3.0};
}

inline PhaseTriple inverse_fortescue(const SequenceTriple& s) {
    return {s.zero + s.positive + s.negative,
            s.zero + kAlpha2 * s.positive + kAlpha * s.negative,
            s.zero + kAlpha * s.positive + kAlpha2 * s.negative};
}

// Largest phase magnitude of the set built from the given sequence components.
inline double peak_phase_magnitude(const SequenceTriple& s) {
    const PhaseTriple p = inverse_fortescue(s);
    return std::max({std::abs(p.a), std::abs(p.b), std::abs(p.c)});
}

// Angle of x/y in degrees, normalized to (-180, 180].
inline double angle_between(Phasor x, Phasor y, double floor = kMagnitudeFloor) {
    if (std::abs(x) < floor || std::abs(y) < floor)
        throw ZeroPhasor("angle_between: operand magnitude below floor");
    return angle_deg(x / y);
}

// One voltage zone of a per-unit system.
struct PerUnitBase {
    double s_base_va = 100e6;
    double v_base_ll = 220e3;

    PerUnitBase() = default;
    PerUnitBase(double s_va, double v_ll) : s_base_va(s_va), v_base_ll(v_ll) {
        if (!(s_va > 0.0) || !(v_ll > 0.0))
            throw std::invalid_argument("PerUnitBase: base power and voltage must be positive");
    }

    double z_base() const { return v_base_ll * v_base_ll / s_base_va; }
    double i_base() const { return s_base_va / (std::sqrt(3.0) * v_base_ll); }

    Phasor impedance_to_pu(Phasor ohms) const { return ohms / z_base(); }
    Phasor impedance_to_ohms(Phasor pu) const { return pu * z_base(); }
    Phasor voltage_to_pu(Phasor volts_ll) const { return volts_ll / v_base_ll; }
    Phasor voltage_to_volts(Phasor pu) const { return pu * v_base_ll; }
    Phasor current_to_pu(Phasor amps) const { return amps / i_base(); }
    Phasor current_to_amps(Phasor pu) const { return pu * i_base(); }
};

}  // namespace gfmrelay
