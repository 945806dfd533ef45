#include "mcloop/harness.hpp"

#include "mcloop/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace mcloop {

using nlohmann::json;

Bits generate_bits(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_bits: n must be >= 1");
    std::mt19937_64 rng(seed);
    Bits bits(n);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
    return bits;
}

Bits with_pilot(const PilotSpec& pilot, const Bits& data) {
    Bits all = pilot.bits;
    all.insert(all.end(), data.begin(), data.end());
    return all;
}

ExperimentReport detect_trace(const SystemConfig& cfg, const ReceivedTrace& trace,
                              const std::optional<Bits>& truth_data, std::string trace_ref) {
    const double ts = cfg.modulation.t_symbol();
    ExperimentReport r;
    r.config_digest = config_digest(cfg);
    r.trace_ref = std::move(trace_ref);
    r.bd = detect(trace, ts, cfg.pilot, Detector::basic, truth_data);
    r.dd = detect(trace, ts, cfg.pilot, Detector::differential, truth_data);
    r.n_data_symbols = r.bd.estimates.size();
    r.offset_isi = characterize_offset_isi(trace, ts);
    return r;
}

ExperimentReport run_and_detect(const SystemConfig& cfg, const Bits& data, ReceivedTrace* trace_out) {
    const auto start = std::chrono::steady_clock::now();
    ReceivedTrace trace = run_experiment(cfg, with_pilot(cfg.pilot, data));
    ExperimentReport r = detect_trace(cfg, trace, data, "<simulated>");
    r.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (trace_out) *trace_out = std::move(trace);
    return r;
}

namespace {

std::string bits_string(const Bits& bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(static_cast<char>('0' + b));
    return s;
}

json detector_json(const DetectionResult& r) {
    json j = {
        {"threshold", r.threshold},
        {"k_p", r.k_p},
        {"estimates", bits_string(r.estimates)},
    };
    if (r.tally) {
        j["ser"] = r.tally->ser;
        j["errors"] = r.tally->errors();
        j["errors_cumulative"] = r.tally->errors_cumulative;
    } else {
        j["ser"] = nullptr;
    }
    return j;
}

}  // namespace

json report_to_json(const ExperimentReport& report) {
    return {
        {"schema_version", kReportSchemaVersion},
        {"config_digest", report.config_digest},
        {"trace", report.trace_ref},
        {"n_data_symbols", report.n_data_symbols},
        {"detectors", {{"bd", detector_json(report.bd)}, {"dd", detector_json(report.dd)}}},
        {"offset_isi", report.offset_isi},
        {"dip_times", report.dip_times},
        {"wall_clock_s", report.wall_clock_s},
    };
}

void export_report(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report " + path.string());
    out << report_to_json(report).dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

void write_error_curves(std::ostream& out, const ExperimentReport& report) {
    if (!report.bd.tally || !report.dd.tally)
        throw std::invalid_argument("write_error_curves: report has no ground truth");
    const auto& bd = report.bd.tally->errors_cumulative;
    const auto& dd = report.dd.tally->errors_cumulative;
    out << "symbol_index,errors_bd,errors_dd\n";
    for (std::size_t i = 0; i < bd.size(); ++i) out << i << ',' << bd[i] << ',' << dd[i] << '\n';
}

void export_error_curves(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_error_curves(out, report);
    if (!out) throw IoError("write failed for " + path.string());
}

namespace {

SerStats summarize(std::vector<double> ser) {
    SerStats s;
    s.mean = std::accumulate(ser.begin(), ser.end(), 0.0) / static_cast<double>(ser.size());
    const auto [lo, hi] = std::minmax_element(ser.begin(), ser.end());
    s.min = *lo;
    s.max = *hi;
    s.ser = std::move(ser);
    return s;
}

}  // namespace

MonteCarloSummary monte_carlo(const SystemConfig& cfg, std::size_t n_runs, std::uint64_t base_seed,
                              const MonteCarloOptions& options) {
    if (n_runs < 1) throw std::invalid_argument("monte_carlo: n_runs must be >= 1");
    cfg.validate();

    std::vector<double> ser_bd(n_runs);
    std::vector<double> ser_dd(n_runs);
    std::vector<std::exception_ptr> failures(n_runs);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t r = next++; r < n_runs; r = next++) {
            try {
                SystemConfig run_cfg = cfg;
                run_cfg.seed = base_seed + r;
                const Bits data = generate_bits(cfg.n_data_bits, options.fixed_bits ? base_seed : run_cfg.seed);
                const ExperimentReport rep = run_and_detect(run_cfg, data);
                ser_bd[r] = rep.bd.tally->ser;
                ser_dd[r] = rep.dd.tally->ser;
            } catch (...) {
                failures[r] = std::current_exception();
            }
        }
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_runs));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    MonteCarloSummary s;
    s.config_digest = config_digest(cfg);
    s.n_runs = n_runs;
    s.base_seed = base_seed;
    s.fixed_bits = options.fixed_bits;
    s.bd = summarize(std::move(ser_bd));
    s.dd = summarize(std::move(ser_dd));
    return s;
}

json monte_carlo_to_json(const MonteCarloSummary& s) {
    auto stats = [](const SerStats& x) {
        return json{{"ser", x.ser}, {"mean", x.mean}, {"min", x.min}, {"max", x.max}};
    };
    return {
        {"schema_version", kReportSchemaVersion},
        {"config_digest", s.config_digest},
        {"n_runs", s.n_runs},
        {"base_seed", s.base_seed},
        {"fixed_bits", s.fixed_bits},
        {"detectors", {{"bd", stats(s.bd)}, {"dd", stats(s.dd)}}},
    };
}

Characterization characterize(const SystemConfig& cfg, double min_prominence) {
    Characterization c;
    c.trace = run_experiment(cfg, Bits{0, 1});
    c.loop_time = loop_time(cfg.geometry);

    const double ts = cfg.modulation.t_symbol();
    const auto smoothed = smooth3(c.trace.samples);
    // Main dip: deepest point after the pulse is launched.
    const auto first = std::min(smoothed.size() - 1, trace_length(ts, c.trace.dt_sample) - 1);
    const auto main_it = std::min_element(smoothed.begin() + static_cast<std::ptrdiff_t>(first), smoothed.end());
    const auto k_main = static_cast<std::size_t>(main_it - smoothed.begin());
    c.t_main = c.trace.time(k_main);
    c.main_value = *main_it;
    c.dip_times = find_interloop_dips(c.trace, c.t_main, min_prominence);
    for (double t : c.dip_times)
        c.dip_values.push_back(smoothed[static_cast<std::size_t>(std::llround(t / c.trace.dt_sample))]);
    c.offset_isi = characterize_offset_isi(c.trace, ts);
    return c;
}

json characterization_to_json(const Characterization& c, const SystemConfig& cfg) {
    return {
        {"schema_version", kReportSchemaVersion},
        {"config_digest", config_digest(cfg)},
        {"loop_time_s", c.loop_time},
        {"effective_velocity_m_s", effective_velocity(cfg.geometry)},
        {"t_main_s", c.t_main},
        {"main_value", c.main_value},
        {"dip_times_s", c.dip_times},
        {"dip_values", c.dip_values},
        {"offset_isi", c.offset_isi},
    };
}

}  // namespace mcloop
