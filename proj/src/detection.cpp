#include "mcloop/detection.hpp"

#include "mcloop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace mcloop {

SymbolFrames partition(const ReceivedTrace& trace, double t_symbol) {
    if (!(t_symbol > 0.0) || !(trace.dt_sample > 0.0))
        throw ConfigError("partition: symbol duration and sampling step must be > 0");
    const double ratio = t_symbol / trace.dt_sample;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
        throw ConfigError("partition: T_S / dt_sample = " + std::to_string(ratio) +
                          " is not a positive integer");

    SymbolFrames out;
    out.frame_length = static_cast<std::size_t>(rounded);
    const std::size_t n = trace.samples.size() / out.frame_length;
    out.frames.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto first = trace.samples.begin() + static_cast<std::ptrdiff_t>(i * out.frame_length);
        out.frames.emplace_back(first, first + static_cast<std::ptrdiff_t>(out.frame_length));
    }
    return out;
}

std::size_t estimate_sampling_instant(const SymbolFrames& frames, const PilotSpec& pilot) {
    if (frames.n_symbols() < pilot.size())
        throw std::invalid_argument("estimate_sampling_instant: fewer frames than pilot symbols");
    std::vector<std::size_t> argmins;
    for (std::size_t i = 0; i < pilot.size(); ++i) {
        if (pilot.bits[i] != 1) continue;
        const auto& f = frames.frames[i];
        argmins.push_back(static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin()));
    }
    if (argmins.empty()) throw CalibrationError("pilot contains no bit 1; cannot locate the dip");
    std::sort(argmins.begin(), argmins.end());
    return argmins[(argmins.size() - 1) / 2];
}

std::vector<double> sample_symbols(const SymbolFrames& frames, std::size_t k_p) {
    if (k_p >= frames.frame_length)
        throw std::out_of_range("sample_symbols: k_p " + std::to_string(k_p) +
                                " outside frame of length " + std::to_string(frames.frame_length));
    std::vector<double> d;
    d.reserve(frames.n_symbols());
    for (const auto& f : frames.frames) d.push_back(f[k_p]);
    return d;
}

double calibrate_bd(std::span<const double> d, const PilotSpec& pilot) {
    const std::size_t np = pilot.size();
    if (d.size() < np) throw std::invalid_argument("calibrate_bd: fewer samples than pilot symbols");

    // Sweep candidates in ascending order. A bit-0 sample is wrong when it
    // lies strictly below the threshold, a bit-1 sample when at or above it.
    std::vector<std::pair<double, std::uint8_t>> sorted;
    for (std::size_t i = 0; i < np; ++i) sorted.emplace_back(d[i], pilot.bits[i]);
    std::sort(sorted.begin(), sorted.end());

    std::size_t ones_total = 0;
    for (const auto& s : sorted) ones_total += s.second;

    std::size_t zeros_below = 0;
    std::size_t ones_below = 0;
    std::size_t best_errors = std::numeric_limits<std::size_t>::max();
    double best = sorted.front().first;
    for (std::size_t i = 0; i < sorted.size();) {
        const double candidate = sorted[i].first;
        const std::size_t errors = zeros_below + (ones_total - ones_below);
        if (errors < best_errors) {
            best_errors = errors;
            best = candidate;
        }
        for (; i < sorted.size() && sorted[i].first == candidate; ++i) {
            if (sorted[i].second) ++ones_below;
            else ++zeros_below;
        }
    }
    return best;
}

Bits detect_bd(std::span<const double> d, double threshold, std::size_t n_pilot) {
    if (!std::isfinite(threshold)) throw std::invalid_argument("detect_bd: threshold must be finite");
    Bits out;
    for (std::size_t i = n_pilot; i < d.size(); ++i) out.push_back(d[i] >= threshold ? 0 : 1);
    return out;
}

std::vector<double> differentiate(std::span<const double> d) {
    std::vector<double> out(d.size(), 0.0);
    for (std::size_t i = 1; i < d.size(); ++i) out[i] = d[i] - d[i - 1];
    return out;
}

std::vector<std::size_t> repeat_indices(const PilotSpec& pilot) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i < pilot.size(); ++i)
        if (pilot.bits[i] == pilot.bits[i - 1]) idx.push_back(i);
    return idx;
}

double calibrate_dd(std::span<const double> d_prime, const PilotSpec& pilot) {
    if (d_prime.size() < pilot.size())
        throw std::invalid_argument("calibrate_dd: fewer samples than pilot symbols");
    const auto idx = repeat_indices(pilot);
    if (idx.empty()) throw CalibrationError("pilot never repeats a bit; differential threshold undefined");
    double xi = 0.0;
    for (auto i : idx) xi = std::max(xi, std::abs(d_prime[i]));
    return xi;
}

Bits detect_dd(std::span<const double> d_prime, double threshold, const PilotSpec& pilot) {
    if (!(threshold >= 0.0)) throw std::invalid_argument("detect_dd: threshold must be >= 0");
    if (pilot.bits.empty()) throw std::invalid_argument("detect_dd: empty pilot");
    Bits out;
    std::uint8_t prev = pilot.bits.back();
    for (std::size_t i = pilot.size(); i < d_prime.size(); ++i) {
        const double x = d_prime[i];
        const std::uint8_t b = std::abs(x) <= threshold ? prev : (x >= 0.0 ? 0 : 1);
        out.push_back(b);
        prev = b;
    }
    return out;
}

ErrorTally evaluate(const Bits& estimates, const Bits& truth) {
    if (estimates.size() != truth.size())
        throw std::invalid_argument("evaluate: estimate/truth length mismatch (" +
                                    std::to_string(estimates.size()) + " vs " +
                                    std::to_string(truth.size()) + ")");
    if (truth.empty()) throw std::invalid_argument("evaluate: empty sequences");
    ErrorTally t;
    t.errors_cumulative.reserve(truth.size());
    std::size_t errors = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        errors += estimates[i] != truth[i];
        t.errors_cumulative.push_back(errors);
    }
    t.ser = static_cast<double>(errors) / static_cast<double>(truth.size());
    return t;
}

DetectionResult detect(const ReceivedTrace& trace, double t_symbol, const PilotSpec& pilot,
                       Detector which, const std::optional<Bits>& truth_data) {
    const SymbolFrames frames = partition(trace, t_symbol);
    DetectionResult r;
    r.detector = which;
    r.k_p = estimate_sampling_instant(frames, pilot);
    r.d = sample_symbols(frames, r.k_p);
    if (which == Detector::basic) {
        r.threshold = calibrate_bd(r.d, pilot);
        r.estimates = detect_bd(r.d, r.threshold, pilot.size());
    } else {
        r.d_prime = differentiate(r.d);
        r.threshold = calibrate_dd(r.d_prime, pilot);
        r.estimates = detect_dd(r.d_prime, r.threshold, pilot);
    }
    if (truth_data) {
        if (truth_data->size() > r.estimates.size())
            throw std::invalid_argument("detect: trace holds " + std::to_string(r.estimates.size()) +
                                        " data symbols, truth has " +
                                        std::to_string(truth_data->size()));
        r.estimates.resize(truth_data->size());
        r.tally = evaluate(r.estimates, *truth_data);
    }
    return r;
}

}  // namespace mcloop
