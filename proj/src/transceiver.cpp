#include "mcloop/transceiver.hpp"

#include "mcloop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mcloop {

IrradiationSchedule::IrradiationSchedule(Bits bits, const ModulationParams& p)
    : bits_(std::move(bits)), params_(p) {
    if (bits_.empty()) throw std::invalid_argument("modulate: empty bit sequence");
    for (auto b : bits_)
        if (b > 1) throw std::invalid_argument("modulate: bits must be 0 or 1");
    params_.validate();
}

double IrradiationSchedule::tx(double t) const {
    if (t < 0.0) return 0.0;
    const double ts = params_.t_symbol();
    const auto i = static_cast<std::size_t>(std::floor(t / ts));
    if (i >= bits_.size() || bits_[i] == 0) return 0.0;
    return t - static_cast<double>(i) * ts < params_.t_irradiation ? params_.tx_intensity_max : 0.0;
}

double IrradiationSchedule::ex(double t) const {
    return params_.ex_enabled && t >= params_.ex_start ? params_.ex_intensity : 0.0;
}

double IrradiationSchedule::rx(double) const { return params_.rx_intensity; }

std::vector<Interval> IrradiationSchedule::tx_intervals() const {
    std::vector<Interval> out;
    const double ts = params_.t_symbol();
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] == 0) continue;
        const double begin = static_cast<double>(i) * ts;
        out.push_back({begin, begin + params_.t_irradiation});
    }
    return out;
}

IrradiationSchedule modulate(const Bits& bits, const ModulationParams& p) { return {bits, p}; }

std::size_t trace_length(double t_record, double dt_sample) {
    if (!(dt_sample > 0.0)) throw std::invalid_argument("trace_length: dt_sample must be > 0");
    if (t_record < 0.0) throw std::invalid_argument("trace_length: t_record must be >= 0");
    return static_cast<std::size_t>(std::floor(t_record / dt_sample + 1e-9)) + 1;
}

Simulation::Simulation(const SystemConfig& cfg, const Bits& bits)
    : cfg_(cfg), schedule_(modulate(bits, cfg.modulation)) {
    cfg_.validate();
    state_ = build_loop(cfg_.geometry, cfg_.n_cells, SpeciesState{cfg_.concentration, 0.0, 0.0});
    d_eff_ = cfg_.dispersion();

    // Fail fast on unstable steps instead of at the first step().
    const double lambda = d_eff_ * cfg_.dt_sim / (state_.cell_length * state_.cell_length);
    if (lambda > 0.5)
        throw ConfigError("dt_sim: dispersion number " + std::to_string(lambda) +
                          " exceeds 0.5 (reduce dt_sim, coarsen n_cells or raise d_mol)");
    if (cfg_.geometry.q_flux * cfg_.dt_sim / state_.cell_volume >=
        static_cast<double>(state_.n_cells()))
        throw ConfigError("dt_sim: flow per step exceeds the circuit volume");

    const auto& z = state_.zones;
    cell_class_.resize(state_.n_cells());
    for (std::size_t i = 0; i < state_.n_cells(); ++i) {
        const ExposureClass c{z.ex[i], z.tx[i], z.rx[i]};
        auto it = std::find_if(classes_.begin(), classes_.end(), [&](const ExposureClass& e) {
            return e.ex == c.ex && e.tx == c.tx && e.rx == c.rx;
        });
        if (it == classes_.end()) {
            if (classes_.size() == 255) throw ConfigError("too many distinct zone overlaps");
            classes_.push_back(c);
            it = classes_.end() - 1;
        }
        cell_class_[i] = static_cast<std::uint8_t>(it - classes_.begin());
        if (z.rx[i] > 0.0) rx_cells_.push_back(i);
    }
    propagators_.resize(classes_.size());
    dark_ = KineticsPropagator(cfg_.kinetics, {}, cfg_.dt_sim);
    if (rx_cells_.empty()) throw ConfigError("geometry: receiver zone covers no cell");
}

void Simulation::step() {
    const double dt = cfg_.dt_sim;
    const double t_mid = time() + 0.5 * dt;

    advect(state_, cfg_.geometry, dt);
    disperse(state_, d_eff_, dt);
    reservoir_mix(state_, cfg_.geometry, dt);

    const double i_tx = schedule_.tx(t_mid);
    const double i_ex = schedule_.ex(t_mid);
    const double i_rx = schedule_.rx(t_mid);
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        const auto& e = classes_[c];
        propagators_[c] = KineticsPropagator(cfg_.kinetics, {e.tx * i_tx, e.ex * i_ex, e.rx * i_rx}, dt);
    }
    auto& cells = state_.cells;
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = propagators_[cell_class_[i]].apply(cells[i]);

    // Reservoir and pending inflow sit in the dark.
    state_.reservoir = dark_.apply(state_.reservoir);
    state_.reservoir_inflow = dark_.apply(state_.reservoir_inflow);

    ++steps_;
}

double Simulation::rx_reading() const {
    double weighted = 0.0;
    double weight = 0.0;
    const double inv_volume = 1.0 / state_.cell_volume;
    const double i_exc = schedule_.rx(time());
    for (auto i : rx_cells_) {
        const double w = state_.zones.rx[i];
        weighted += w * fluorescence(state_.cells[i] * inv_volume, cfg_.kinetics, i_exc);
        weight += w;
    }
    return weighted / weight;
}

ReceivedTrace run_experiment(const SystemConfig& cfg, const Bits& bits, const SampleObserver& observer) {
    Simulation sim(cfg, bits);
    const std::size_t per_sample = cfg.steps_per_sample();

    ReceivedTrace trace;
    trace.dt_sample = cfg.dt_sample;
    trace.t_record = sim.schedule().duration() + cfg.tail_time;
    const std::size_t n = trace_length(trace.t_record, trace.dt_sample);
    trace.samples.reserve(n);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma = cfg.noise_sigma * sim.rx_reading();

    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0)
            for (std::size_t s = 0; s < per_sample; ++s) sim.step();
        const double clean = sim.rx_reading();
        if (!std::isfinite(clean))
            throw InstabilityError("non-finite RX reading at t = " + std::to_string(sim.time()));
        const double noisy = sigma > 0.0 ? clean + sigma * gauss(rng) : clean;
        trace.samples.push_back(std::max(0.0, noisy));
        if (observer) observer(sim);
    }
    return trace;
}

double characterize_offset_isi(const ReceivedTrace& trace, double t_baseline) {
    const auto& x = trace.samples;
    if (x.empty() || !(trace.time(x.size() - 1) > t_baseline) || t_baseline < 0.0)
        throw std::invalid_argument("characterize_offset_isi: trace must extend past t_baseline");

    const auto n_base = std::min(x.size(), trace_length(t_baseline, trace.dt_sample));
    const double base = std::accumulate(x.begin(), x.begin() + n_base, 0.0) / static_cast<double>(n_base);
    if (base == 0.0) throw std::domain_error("characterize_offset_isi: zero baseline");

    const auto n_tail = std::max<std::size_t>(1, (x.size() + 9) / 10);
    const double tail = std::accumulate(x.end() - n_tail, x.end(), 0.0) / static_cast<double>(n_tail);
    return 1.0 - tail / base;
}

std::vector<double> smooth3(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> s(n);
    if (n == 1) s[0] = x[0];
    for (std::size_t k = 0; k < n && n > 1; ++k) {
        if (k == 0)
            s[k] = 0.5 * (x[0] + x[1]);
        else if (k + 1 == n)
            s[k] = 0.5 * (x[k - 1] + x[k]);
        else
            s[k] = (x[k - 1] + x[k] + x[k + 1]) / 3.0;
    }
    return s;
}

std::vector<double> find_interloop_dips(const ReceivedTrace& trace, double t_main, double min_prominence) {
    const auto& x = trace.samples;
    if (x.empty() || t_main < 0.0 || t_main > trace.time(x.size() - 1))
        throw std::invalid_argument("find_interloop_dips: t_main outside the trace");
    const std::vector<double> s = smooth3(x);
    const std::size_t n = s.size();

    // Leave the basin of the main dip first.
    auto k = static_cast<std::size_t>(std::llround(t_main / trace.dt_sample));
    k = std::min(k, n - 1);
    while (k + 1 < n && s[k + 1] <= s[k]) ++k;
    const std::size_t region = k;

    std::vector<double> dips;
    for (std::size_t i = region + 1; i + 1 < n; ++i) {
        if (!(s[i] < s[i - 1])) continue;
        std::size_t j = i;
        while (j + 1 < n && s[j + 1] == s[i]) ++j;
        if (j + 1 >= n || !(s[j + 1] > s[i])) continue;

        double left = s[i];
        for (std::size_t l = i; l-- > region;) {
            if (s[l] < s[i]) break;
            left = std::max(left, s[l]);
        }
        double right = s[i];
        for (std::size_t r = j + 1; r < n; ++r) {
            if (s[r] < s[i]) break;
            right = std::max(right, s[r]);
        }
        if (std::min(left, right) - s[i] >= min_prominence && std::min(left, right) > s[i])
            dips.push_back(trace.time(i));
        i = j;
    }
    return dips;
}

}  // namespace mcloop
