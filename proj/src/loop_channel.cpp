#include "mcloop/loop_channel.hpp"

#include "mcloop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mcloop {

double LoopGeometry::cross_section() const { return std::numbers::pi * r_tube * r_tube; }

double LoopGeometry::tube_volume() const { return cross_section() * l_tube; }

void LoopGeometry::validate() const {
    auto positive = [](double v, const char* field) {
        if (!(std::isfinite(v) && v > 0.0))
            throw ConfigError(std::string("geometry.") + field + ": must be > 0");
    };
    positive(r_tube, "r_tube");
    positive(l_tube, "l_tube");
    positive(v_reservoir, "v_reservoir");
    positive(v_pumpflowcell, "v_pumpflowcell");
    positive(q_flux, "q_flux");
    positive(l_tx, "l_tx");
    positive(l_ex, "l_ex");
    positive(l_rx, "l_rx");
    positive(d_tx_rx, "d_tx_rx");
    if (!(reservoir_exchange > 0.0 && reservoir_exchange <= 1.0))
        throw ConfigError("geometry.reservoir_exchange: must lie in (0, 1]");
    if (l_ex + l_tx + d_tx_rx + l_rx > l_tube)
        throw ConfigError("geometry: l_ex + l_tx + d_tx_rx + l_rx exceeds l_tube");
}

double effective_velocity(const LoopGeometry& g) { return g.q_flux / g.cross_section(); }

double loop_time(const LoopGeometry& g) { return (g.v_pumpflowcell + g.tube_volume()) / g.q_flux; }

double taylor_aris_dispersion(double r_tube, double velocity, double d_mol) {
    if (!(d_mol > 0.0)) throw std::domain_error("taylor_aris_dispersion: d_mol must be > 0");
    return r_tube * r_tube * velocity * velocity / (48.0 * d_mol) + d_mol;
}

SpeciesState LoopState::total() const {
    SpeciesState sum = reservoir + reservoir_inflow;
    for (const auto& c : cells) sum += c;
    return sum;
}

double LoopState::represented_volume(const LoopGeometry& g) const {
    return static_cast<double>(cells.size()) * cell_volume + g.v_reservoir;
}

namespace {

std::vector<double> zone_overlap(std::size_t n_tube, std::size_t n_total, double dx, double begin,
                                 double length) {
    std::vector<double> w(n_total, 0.0);
    const double end = begin + length;
    for (std::size_t i = 0; i < n_tube; ++i) {
        const double lo = static_cast<double>(i) * dx;
        const double hi = lo + dx;
        const double overlap = std::min(hi, end) - std::max(lo, begin);
        if (overlap > 0.0) w[i] = std::min(1.0, overlap / dx);
    }
    return w;
}

}  // namespace

LoopState build_loop(const LoopGeometry& g, std::size_t n_cells, const SpeciesState& initial) {
    g.validate();
    if (n_cells < 10) throw ConfigError("n_cells: must be >= 10");
    if (initial.on < 0.0 || initial.off < 0.0 || initial.bleached < 0.0)
        throw ConfigError("initial state: concentrations must be >= 0");

    LoopState s;
    s.n_tube_cells = n_cells;
    s.cell_length = g.l_tube / static_cast<double>(n_cells);
    s.cell_volume = g.cross_section() * s.cell_length;
    const auto n_pf = static_cast<std::size_t>(std::llround(g.v_pumpflowcell / s.cell_volume));
    const std::size_t n_total = n_cells + n_pf;

    s.cells.assign(n_total, initial * s.cell_volume);
    s.reservoir = initial * g.v_reservoir;
    s.zones.ex = zone_overlap(n_cells, n_total, s.cell_length, g.ex_begin(), g.l_ex);
    s.zones.tx = zone_overlap(n_cells, n_total, s.cell_length, g.tx_begin(), g.l_tx);
    s.zones.rx = zone_overlap(n_cells, n_total, s.cell_length, g.rx_begin(), g.l_rx);
    return s;
}

SpeciesState reservoir_concentration(const LoopState& state, const LoopGeometry& g) {
    return state.reservoir * (1.0 / g.v_reservoir);
}

void advect(LoopState& state, const LoopGeometry& g, double dt) {
    if (dt < 0.0) throw std::invalid_argument("advect: dt must be >= 0");
    if (dt == 0.0) return;

    auto& c = state.cells;
    const std::size_t n = c.size();
    const double shift = g.q_flux * dt / state.cell_volume;
    if (shift >= static_cast<double>(n))
        throw ConfigError("advect: step moves fluid further than the whole circuit; reduce dt_sim");
    if (g.reservoir_exchange * g.q_flux * dt > g.v_reservoir)
        throw ConfigError("advect: step exchanges more than the reservoir volume; reduce dt_sim");

    const auto whole = static_cast<std::size_t>(shift);
    const double frac = shift - static_cast<double>(whole);
    const double keep = 1.0 - frac;
    const double phi = g.reservoir_exchange;

    // Cell j spans [j, j+1) and moves to [j+shift, j+1+shift); whatever
    // crosses n re-enters at the inlet, blended with reservoir fluid.
    const std::size_t tail_begin = n - std::min(n, whole + 1);
    const std::vector<SpeciesState> tail(c.begin() + static_cast<std::ptrdiff_t>(tail_begin), c.end());
    SpeciesState crossing;
    for (std::size_t j = tail_begin; j < n; ++j) {
        const double f = std::clamp(static_cast<double>(j) + 1.0 + shift - static_cast<double>(n), 0.0, 1.0);
        if (f > 0.0) crossing += tail[j - tail_begin] * f;
    }

    const SpeciesState feed = reservoir_concentration(state, g) * state.cell_volume;
    auto inlet = [&](std::size_t back) {  // virtual source cell at index -back
        return tail[tail.size() - back] * (1.0 - phi) + feed * phi;
    };

    // Real sources of new cell i are old cells i-whole and i-whole-1, both
    // at lower indices, so walking downwards updates in place.
    for (std::size_t i = n; i-- > 0;) {
        const SpeciesState a = i >= whole ? c[i - whole] : inlet(whole - i);
        if (frac == 0.0) {
            c[i] = a;
            continue;
        }
        const SpeciesState b = i >= whole + 1 ? c[i - whole - 1] : inlet(whole + 1 - i);
        c[i] = a * keep + b * frac;
    }

    state.reservoir -= feed * (shift * phi);
    state.reservoir_inflow += crossing * phi;
}

void disperse(LoopState& state, double d_eff, double dt) {
    if (d_eff < 0.0) throw std::invalid_argument("disperse: d_eff must be >= 0");
    if (dt < 0.0) throw std::invalid_argument("disperse: dt must be >= 0");
    if (d_eff == 0.0 || dt == 0.0) return;

    const double lambda = d_eff * dt / (state.cell_length * state.cell_length);
    if (lambda > 0.5)
        throw ConfigError("disperse: d_eff * dt / dx^2 = " + std::to_string(lambda) +
                          " exceeds 0.5; reduce dt_sim or increase d_mol");

    auto& c = state.cells;
    const std::size_t n = c.size();
    SpeciesState prev = c[0];
    for (std::size_t i = 0; i < n; ++i) {
        const SpeciesState cur = c[i];
        SpeciesState flux;
        if (i > 0) flux += prev - cur;
        if (i + 1 < n) flux += c[i + 1] - cur;
        c[i] = cur + flux * lambda;
        prev = cur;
    }
}

void reservoir_mix(LoopState& state, const LoopGeometry& g, double dt) {
    (void)g;
    if (dt < 0.0) throw std::invalid_argument("reservoir_mix: dt must be >= 0");
    if (dt == 0.0) return;
    state.reservoir += state.reservoir_inflow;
    state.reservoir_inflow = {};
}

}  // namespace mcloop
