#pragma once

// One-dimensional transport around the closed fluid circuit.
//
// The circuit is a line of equal-volume cells (the tube followed by the pump
// and flow-cell dead volume) whose outlet drains into a well-mixed reservoir
// and whose inlet is fed from it. Cells hold amounts (concentration times
// cell volume), so every transport operator is a redistribution of amounts.

#include "mcloop/photophysics.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mcloop {

struct LoopGeometry {
    double r_tube = 8e-4;              // [m]
    double l_tube = 2.7;               // [m]
    double v_reservoir = 2.50e-6;      // [m^3]
    double v_pumpflowcell = 1.07e-6;   // [m^3]
    double q_flux = 9.45e-6 / 60.0;    // [m^3/s]
    double l_tx = 0.29;                // [m]
    double l_ex = 0.29;                // [m]
    double l_rx = 3e-3;                // [m]
    double d_tx_rx = 0.06;             // TX end to RX start [m]
    // Fraction of the outlet flow routed through the mixed reservoir; the
    // rest passes straight from the outlet to the inlet. 1 = tank in series.
    double reservoir_exchange = 0.75;

    double cross_section() const;
    double tube_volume() const;

    // Zone positions along the tube, measured from the tube inlet.
    // EX and TX abut; EX starts at the inlet.
    double ex_begin() const { return 0.0; }
    double tx_begin() const { return l_ex; }
    double rx_begin() const { return l_ex + l_tx + d_tx_rx; }

    void validate() const;
};

double effective_velocity(const LoopGeometry& g);

/// Mean time for one circuit of tube plus pump/flow cell, (V_PF + V_T) / Q.
double loop_time(const LoopGeometry& g);

/// Taylor-Aris effective axial diffusivity r^2 v^2 / (48 D) + D.
double taylor_aris_dispersion(double r_tube, double velocity, double d_mol);

/// Fraction of each cell covered by an irradiated zone.
struct ZoneMap {
    std::vector<double> ex;
    std::vector<double> tx;
    std::vector<double> rx;
};

struct LoopState {
    std::vector<SpeciesState> cells;  // amounts; tube cells first, then pump/flow cell
    SpeciesState reservoir;           // amount in the mixed tank
    SpeciesState reservoir_inflow;    // arrived from the outlet, not yet mixed
    std::size_t n_tube_cells = 0;
    double cell_length = 0.0;         // [m]
    double cell_volume = 0.0;         // [m^3]
    ZoneMap zones;

    std::size_t n_cells() const { return cells.size(); }
    SpeciesState total() const;
    /// Volume of loop fluid represented by the cells and the reservoir.
    double represented_volume(const LoopGeometry& g) const;
};

/// Builds the ring with every compartment at concentration `initial`.
/// `n_cells` discretizes the tube; the pump/flow-cell volume is appended as
/// round(V_PF / cell volume) further cells. Throws ConfigError when
/// n_cells < 10 or the zones do not fit in the tube.
LoopState build_loop(const LoopGeometry& g, std::size_t n_cells, const SpeciesState& initial);

/// Shifts the cell contents downstream by q_flux * dt of volume. Whole-cell
/// shifts are exact permutations; the fractional remainder is split
/// linearly between neighbouring cells. Of the material leaving the outlet,
/// the fraction `reservoir_exchange` goes to `reservoir_inflow` and is
/// replaced at the inlet by fluid at the reservoir's mixed concentration;
/// the remainder wraps around to the inlet unchanged.
void advect(LoopState& state, const LoopGeometry& g, double dt);

/// Conservative explicit second-difference smoothing along the cells with
/// zero-flux ends. Reservoir untouched. Throws ConfigError when
/// d_eff * dt / dx^2 > 0.5.
void disperse(LoopState& state, double d_eff, double dt);

/// Ideal stirred tank: merges pending inflow into the mixed reservoir.
/// Identity for dt == 0.
void reservoir_mix(LoopState& state, const LoopGeometry& g, double dt);

/// Mixed reservoir concentration.
SpeciesState reservoir_concentration(const LoopState& state, const LoopGeometry& g);

}  // namespace mcloop
