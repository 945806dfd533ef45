#pragma once

#include "mcloop/config.hpp"
#include "mcloop/detection.hpp"
#include "mcloop/transceiver.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mcloop {

inline constexpr int kReportSchemaVersion = 1;

/// Equiprobable bits from a 64-bit Mersenne Twister (top bit of each draw),
/// identical on every platform for a given seed.
Bits generate_bits(std::size_t n, std::uint64_t seed);

Bits with_pilot(const PilotSpec& pilot, const Bits& data);

struct ExperimentReport {
    std::string config_digest;
    std::string trace_ref;
    std::size_t n_data_symbols = 0;
    DetectionResult bd;
    DetectionResult dd;
    double offset_isi = 0.0;
    std::vector<double> dip_times;
    double wall_clock_s = 0.0;
};

/// Detection with both detectors on an existing trace. `truth_data` is the
/// data payload without the pilot.
ExperimentReport detect_trace(const SystemConfig& cfg, const ReceivedTrace& trace,
                              const std::optional<Bits>& truth_data, std::string trace_ref);

/// Simulates pilot + `data`, then runs detect_trace on the result.
ExperimentReport run_and_detect(const SystemConfig& cfg, const Bits& data,
                                ReceivedTrace* trace_out = nullptr);

nlohmann::json report_to_json(const ExperimentReport& report);
void export_report(const ExperimentReport& report, const std::filesystem::path& path);

/// CSV `symbol_index,errors_bd,errors_dd` over the data symbols.
void write_error_curves(std::ostream& out, const ExperimentReport& report);
void export_error_curves(const ExperimentReport& report, const std::filesystem::path& path);

struct SerStats {
    std::vector<double> ser;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct MonteCarloSummary {
    std::string config_digest;
    std::size_t n_runs = 0;
    std::uint64_t base_seed = 0;
    bool fixed_bits = false;
    SerStats bd;
    SerStats dd;
};

struct MonteCarloOptions {
    bool fixed_bits = false;   // reuse the base_seed payload in every run
    unsigned threads = 0;      // 0: hardware concurrency
};

/// Run r uses seed base_seed + r for noise and (unless fixed_bits) payload.
MonteCarloSummary monte_carlo(const SystemConfig& cfg, std::size_t n_runs, std::uint64_t base_seed,
                              const MonteCarloOptions& options = {});
nlohmann::json monte_carlo_to_json(const MonteCarloSummary& summary);

/// Single-pulse experiment: symbols <0, 1> followed by tail_time. Reports the
/// main dip, the recurring dips after it, and the offset relative to the
/// first (idle) symbol interval.
struct Characterization {
    ReceivedTrace trace;
    double t_main = 0.0;
    std::vector<double> dip_times;
    std::vector<double> dip_values;   // smoothed trace at each dip
    double main_value = 0.0;          // smoothed trace at t_main
    double offset_isi = 0.0;
    double loop_time = 0.0;
};

Characterization characterize(const SystemConfig& cfg, double min_prominence = 0.0);
nlohmann::json characterization_to_json(const Characterization& c, const SystemConfig& cfg);

}  // namespace mcloop
