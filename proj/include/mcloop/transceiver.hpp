#pragma once

#include "mcloop/config.hpp"
#include "mcloop/loop_channel.hpp"
#include "mcloop/photophysics.hpp"

#include <cstddef>
#include <functional>
#include <random>
#include <vector>

namespace mcloop {

struct Interval {
    double begin = 0.0;
    double end = 0.0;  // exclusive
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Piecewise-constant light program for the three LED zones. TX is binary
/// on-off keyed per symbol; EX is a step at ex_start; RX excitation is
/// constant.
class IrradiationSchedule {
public:
    IrradiationSchedule() = default;
    IrradiationSchedule(Bits bits, const ModulationParams& p);

    double tx(double t) const;
    double ex(double t) const;
    double rx(double t) const;

    /// Half-open TX-on intervals, one per bit 1, in symbol order.
    std::vector<Interval> tx_intervals() const;
    double duration() const { return static_cast<double>(bits_.size()) * params_.t_symbol(); }
    const Bits& bits() const { return bits_; }

private:
    Bits bits_;
    ModulationParams params_;
};

/// Throws std::invalid_argument for an empty sequence or non-binary entries.
IrradiationSchedule modulate(const Bits& bits, const ModulationParams& p);

struct ReceivedTrace {
    std::vector<double> samples;
    double dt_sample = 1.0;
    double t_record = 0.0;

    double time(std::size_t k) const { return static_cast<double>(k) * dt_sample; }
};

/// floor(t_record / dt) + 1, robust to t_record being an exact multiple.
std::size_t trace_length(double t_record, double dt_sample);

/// Time-stepped closed-loop experiment. Each step applies advection,
/// dispersion, reservoir mixing and then the zone kinetics.
class Simulation {
public:
    Simulation(const SystemConfig& cfg, const Bits& bits);

    void step();
    double time() const { return static_cast<double>(steps_) * cfg_.dt_sim; }
    std::size_t steps() const { return steps_; }

    /// Noise-free RX fluorescence: volume-weighted mean over the RX cells.
    double rx_reading() const;

    const LoopState& state() const { return state_; }
    const IrradiationSchedule& schedule() const { return schedule_; }
    const SystemConfig& config() const { return cfg_; }

private:
    struct ExposureClass {
        double ex = 0.0;
        double tx = 0.0;
        double rx = 0.0;
    };

    SystemConfig cfg_;
    IrradiationSchedule schedule_;
    LoopState state_;
    double d_eff_ = 0.0;
    std::size_t steps_ = 0;
    std::vector<ExposureClass> classes_;
    std::vector<std::uint8_t> cell_class_;
    std::vector<KineticsPropagator> propagators_;
    KineticsPropagator dark_;
    std::vector<std::size_t> rx_cells_;
};

using SampleObserver = std::function<void(const Simulation&)>;

/// Simulates pilot-free `bits` (the caller prepends any pilot) for
/// len(bits) * T_S + tail_time seconds, sampling the RX every dt_sample and
/// adding Gaussian noise of noise_sigma times the initial reading.
/// `observer`, if set, runs after every sample is taken.
ReceivedTrace run_experiment(const SystemConfig& cfg, const Bits& bits,
                             const SampleObserver& observer = {});

/// 1 - mean(last 10% of samples) / mean(samples with t <= t_baseline).
/// Positive values mean the level has sunk below its starting value.
double characterize_offset_isi(const ReceivedTrace& trace, double t_baseline);

/// Times of local minima after the main dip at t_main, found on a 3-sample
/// moving average. Minima shallower than `min_prominence` (topographic
/// prominence on the smoothed trace) are ignored.
std::vector<double> find_interloop_dips(const ReceivedTrace& trace, double t_main,
                                        double min_prominence = 0.0);

/// Centered 3-sample moving average; end points average the two available.
std::vector<double> smooth3(const std::vector<double>& x);

}  // namespace mcloop
