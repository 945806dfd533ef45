#pragma once

// Receiver chain: framing of the RX trace into symbol intervals, pilot-based
// choice of the sampling instant, and two threshold detectors. The basic
// detector compares each sample with a fixed level; the differential
// detector looks at the change between consecutive samples, which cancels
// slow drifts of the received level.

#include "mcloop/config.hpp"
#include "mcloop/transceiver.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mcloop {

struct SymbolFrames {
    std::vector<std::vector<double>> frames;
    std::size_t frame_length = 0;

    std::size_t n_symbols() const { return frames.size(); }
};

/// Frame i holds R[k + i*L], 0 <= k < L, L = t_symbol / dt_sample. A
/// trailing partial frame is dropped. Throws ConfigError if L is not a
/// positive integer.
SymbolFrames partition(const ReceivedTrace& trace, double t_symbol);

/// Lower median of the per-frame argmin over the pilot's bit-1 frames.
/// Throws CalibrationError if the pilot has no 1, std::invalid_argument if
/// there are fewer frames than pilot symbols.
std::size_t estimate_sampling_instant(const SymbolFrames& frames, const PilotSpec& pilot);

/// d[i] = frames[i][k_p]. Throws std::out_of_range for k_p >= L.
std::vector<double> sample_symbols(const SymbolFrames& frames, std::size_t k_p);

/// Lowest pilot sample value minimizing the Hamming distance between the
/// pilot and its basic-detector estimates.
double calibrate_bd(std::span<const double> d, const PilotSpec& pilot);

/// Estimates for i >= n_pilot: 0 if d[i] >= threshold, else 1.
Bits detect_bd(std::span<const double> d, double threshold, std::size_t n_pilot);

/// d'[0] = 0, d'[i] = d[i] - d[i-1].
std::vector<double> differentiate(std::span<const double> d);

/// Indices i in [1, N_P) where the pilot repeats its previous bit.
std::vector<std::size_t> repeat_indices(const PilotSpec& pilot);

/// max |d'[i]| over the pilot's repeat indices. Throws CalibrationError when
/// the pilot never repeats a bit.
double calibrate_dd(std::span<const double> d_prime, const PilotSpec& pilot);

/// Estimates for i >= N_P. The recursion is seeded with the last pilot bit;
/// |d'| <= threshold repeats the previous estimate, otherwise d' > 0 gives 0
/// and d' < 0 gives 1.
Bits detect_dd(std::span<const double> d_prime, double threshold, const PilotSpec& pilot);

struct ErrorTally {
    std::vector<std::size_t> errors_cumulative;
    double ser = 0.0;

    std::size_t errors() const { return errors_cumulative.empty() ? 0 : errors_cumulative.back(); }
};

/// Throws std::invalid_argument on length mismatch or empty input.
ErrorTally evaluate(const Bits& estimates, const Bits& truth);

enum class Detector { basic, differential };

struct DetectionResult {
    Detector detector = Detector::basic;
    std::vector<double> d;
    std::vector<double> d_prime;   // differential detector only
    std::size_t k_p = 0;
    double threshold = 0.0;
    Bits estimates;                // data symbols only
    std::optional<ErrorTally> tally;  // present when the truth is known
};

/// Full chain on a trace whose first N_P symbols are the pilot. `truth_data`
/// holds the transmitted data bits (without the pilot) when known.
DetectionResult detect(const ReceivedTrace& trace, double t_symbol, const PilotSpec& pilot,
                       Detector which, const std::optional<Bits>& truth_data = std::nullopt);

}  // namespace mcloop
