#pragma once

#include <cmath>

#include "gfmrelay/network.hpp"

namespace gfmrelay {

// Thevenin equivalent of the external grid at bus 2.
struct GridEquivalent {
    double scr = 10.0;        // short-circuit MVA over the base power
    double xr = 10.0;         // X/R of the positive- and negative-sequence impedance
    double z0_ratio = 3.0;    // Z_g0 / Z_g1
    Phasor emf{1.0, 0.0};
};

// Physical circuit data. Line impedances are per km in ohms on the grid side.
struct CircuitParams {
    double s_base_mva = 100.0;
    double v_grid_kv = 220.0;
    double v_ibr_kv = 33.0;
    double frequency_hz = 50.0;
    double line_km = 100.0;
    Phasor z_line1_ohm_per_km{0.03, 0.34};
    Phasor z_line0_ohm_per_km{0.18, 1.19};
    GridEquivalent grid{};

    PerUnitBase grid_base() const { return {s_base_mva * 1e6, v_grid_kv * 1e3}; }
    PerUnitBase ibr_base() const { return {s_base_mva * 1e6, v_ibr_kv * 1e3}; }

    // Per-sequence impedance of a length of line, p.u. on the grid base.
    SequenceTriple line_segment_pu(double km) const {
        const PerUnitBase b = grid_base();
        const Phasor z1 = b.impedance_to_pu(z_line1_ohm_per_km * km);
        return {z1, z1, b.impedance_to_pu(z_line0_ohm_per_km * km)};
    }

    SequenceTriple line_pu() const { return line_segment_pu(line_km); }

    SequenceTriple grid_pu() const {
        const double mag = 1.0 / grid.scr;
        const Phasor z1 = std::polar(mag, std::atan(grid.xr));
        return {z1, z1, grid.z0_ratio * z1};
    }

    void validate() const {
        if (!(s_base_mva > 0.0) || !(v_grid_kv > 0.0) || !(v_ibr_kv > 0.0) || !(frequency_hz > 0.0))
            throw std::invalid_argument("circuit ratings must be positive");
        if (!(line_km > 0.0)) throw std::invalid_argument("line length must be positive");
        for (Phasor z : {z_line1_ohm_per_km, z_line0_ohm_per_km})
            if (z.real() < 0.0 || !(z.imag() > 0.0))
                throw std::invalid_argument("line impedance needs R >= 0 and X > 0");
        if (!(grid.scr > 0.0) || !(grid.xr > 0.0) || !(grid.z0_ratio > 0.0))
            throw std::invalid_argument("grid equivalent parameters must be positive");
    }
};

// Network with the given source branch attached; collection may be empty.
inline SequenceNetwork make_network(const CircuitParams& c, const SourceBranch& source,
                                    const SequenceTriple& collection = {}) {
    SequenceNetwork net;
    net.source = source;
    net.collection = collection;
    net.line = c.line_pu();
    net.grid = {c.grid.emf, c.grid_pu()};
    net.z_base_ohm = c.grid_base().z_base();
    return net;
}

}  // namespace gfmrelay
