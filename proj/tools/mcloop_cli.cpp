// Command-line front end: simulate closed-loop experiments, run the
// detectors on simulated or recorded traces, and summarize error rates.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical instability,
// 4 I/O error, 1 anything else.

#include "mcloop/config.hpp"
#include "mcloop/errors.hpp"
#include "mcloop/harness.hpp"
#include "mcloop/trace_io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace mcloop;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
    cmd->add_option("--config", c.config_path, "JSON config (SI units); defaults apply to absent keys");
    cmd->add_option("--seed", c.seed, "Seed for payload bits and measurement noise");
    auto* out = cmd->add_option("--out", c.out, "Output path ('-' for stdout)");
    if (out_required) out->required();
}

SystemConfig resolve(const Common& c) {
    SystemConfig cfg = c.config_path.empty() ? SystemConfig{} : load_config(c.config_path);
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    return cfg;
}

void emit_json(const nlohmann::json& j, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write " + out);
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed for " + out);
}

void print_summary(const ExperimentReport& r) {
    std::cerr << "k_p=" << r.bd.k_p << "  xi_R=" << r.bd.threshold << "  xi_D=" << r.dd.threshold
              << "  offset_isi=" << r.offset_isi << '\n';
    if (r.bd.tally && r.dd.tally)
        std::cerr << "BD errors " << r.bd.tally->errors() << " (SER " << r.bd.tally->ser << ")  DD errors "
                  << r.dd.tally->errors() << " (SER " << r.dd.tally->ser << ")\n";
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Closed-loop media-modulation link simulator and detectors"};
    app.require_subcommand(1);

    Common sim_opts;
    std::optional<std::size_t> sim_bits;
    std::string sim_bits_out;
    auto* simulate = app.add_subcommand("simulate", "Simulate pilot + random payload, write the RX trace CSV");
    add_common(simulate, sim_opts, true);
    simulate->add_option("--n-bits", sim_bits, "Payload length (default: n_data_bits)");
    simulate->add_option("--bits-out", sim_bits_out, "Also write the payload bits");

    Common det_opts;
    std::string det_trace;
    std::string det_bits;
    auto* detect_cmd = app.add_subcommand("detect", "Detect a simulated trace; payload regenerated from the seed");
    add_common(detect_cmd, det_opts, false);
    detect_cmd->add_option("--trace", det_trace, "Trace CSV")->required();
    detect_cmd->add_option("--bits", det_bits, "Payload bits file (overrides the seed)");

    Common run_opts;
    std::string run_trace_out;
    std::string run_errors_csv;
    auto* run = app.add_subcommand("run", "Simulate and detect in one go");
    add_common(run, run_opts, false);
    run->add_option("--trace-out", run_trace_out, "Also write the RX trace CSV");
    run->add_option("--errors-csv", run_errors_csv, "Write cumulative error curves CSV");

    Common imp_opts;
    std::string imp_trace;
    std::string imp_bits;
    auto* import_detect = app.add_subcommand("import-detect", "Detect an externally recorded trace");
    add_common(import_detect, imp_opts, false);
    import_detect->add_option("--trace", imp_trace, "Recorded trace CSV")->required();
    import_detect->add_option("--bits", imp_bits, "Transmitted payload bits, if known");

    Common chr_opts;
    std::string chr_trace_out;
    double chr_prominence = 0.0;
    auto* characterize_cmd = app.add_subcommand("characterize", "Single-pulse response: recurring dips and offset");
    add_common(characterize_cmd, chr_opts, false);
    characterize_cmd->add_option("--trace-out", chr_trace_out, "Also write the RX trace CSV");
    characterize_cmd->add_option("--min-prominence", chr_prominence, "Ignore dips shallower than this");

    Common mc_opts;
    std::size_t mc_runs = 10;
    bool mc_fixed = false;
    unsigned mc_threads = 0;
    auto* mc = app.add_subcommand("monte-carlo", "Repeat run with consecutive seeds and aggregate SER");
    add_common(mc, mc_opts, false);
    mc->add_option("--runs", mc_runs, "Number of runs")->check(CLI::PositiveNumber);
    mc->add_flag("--fixed-bits", mc_fixed, "Same payload in every run");
    mc->add_option("--threads", mc_threads, "Worker threads (0: all cores)");

    Common cfg_opts;
    auto* show_config = app.add_subcommand("config", "Print the resolved configuration with every key filled in");
    add_common(show_config, cfg_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (simulate->parsed()) {
        SystemConfig cfg = resolve(sim_opts);
        const Bits data = generate_bits(sim_bits.value_or(cfg.n_data_bits), cfg.seed);
        const ReceivedTrace trace = run_experiment(cfg, with_pilot(cfg.pilot, data));
        if (sim_opts.out == "-")
            write_trace(std::cout, trace);
        else
            export_trace(trace, sim_opts.out);
        if (!sim_bits_out.empty()) write_bits(data, sim_bits_out);
    } else if (detect_cmd->parsed()) {
        const SystemConfig cfg = resolve(det_opts);
        const ReceivedTrace trace = import_trace(det_trace);
        const Bits truth = det_bits.empty() ? generate_bits(cfg.n_data_bits, cfg.seed) : read_bits(det_bits);
        const ExperimentReport r = detect_trace(cfg, trace, truth, det_trace);
        print_summary(r);
        emit_json(report_to_json(r), det_opts.out);
    } else if (run->parsed()) {
        const SystemConfig cfg = resolve(run_opts);
        ReceivedTrace trace;
        const ExperimentReport r = run_and_detect(cfg, generate_bits(cfg.n_data_bits, cfg.seed), &trace);
        if (!run_trace_out.empty()) export_trace(trace, run_trace_out);
        if (!run_errors_csv.empty()) export_error_curves(r, run_errors_csv);
        print_summary(r);
        emit_json(report_to_json(r), run_opts.out);
    } else if (import_detect->parsed()) {
        const SystemConfig cfg = resolve(imp_opts);
        const ReceivedTrace trace = import_trace(imp_trace);
        std::optional<Bits> truth;
        if (!imp_bits.empty()) truth = read_bits(imp_bits);
        const ExperimentReport r = detect_trace(cfg, trace, truth, imp_trace);
        print_summary(r);
        emit_json(report_to_json(r), imp_opts.out);
    } else if (characterize_cmd->parsed()) {
        const SystemConfig cfg = resolve(chr_opts);
        const Characterization c = characterize(cfg, chr_prominence);
        if (!chr_trace_out.empty()) export_trace(c.trace, chr_trace_out);
        emit_json(characterization_to_json(c, cfg), chr_opts.out);
    } else if (show_config->parsed()) {
        const SystemConfig cfg = resolve(cfg_opts);
        emit_json(config_to_json(cfg), cfg_opts.out);
    } else if (mc->parsed()) {
        const SystemConfig cfg = resolve(mc_opts);
        const auto summary = monte_carlo(cfg, mc_runs, cfg.seed, {mc_fixed, mc_threads});
        emit_json(monte_carlo_to_json(summary), mc_opts.out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CalibrationError& e) {
        std::cerr << "calibration error: " << e.what() << '\n';
        return 2;
    } catch (const InstabilityError& e) {
        std::cerr << "numerical instability: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
