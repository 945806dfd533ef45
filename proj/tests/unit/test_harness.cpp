#include "doctest.h"

#include "mcloop/config.hpp"
#include "mcloop/errors.hpp"
#include "mcloop/harness.hpp"
#include "mcloop/trace_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace mcloop;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "mcloop_unit";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

void write_rows(const fs::path& p, std::size_t n, double dt) {
    std::ofstream out(p);
    out << "time_s,intensity\n";
    for (std::size_t i = 0; i < n; ++i) out << dt * static_cast<double>(i) << ',' << 1.0 + 0.001 * double(i % 7) << '\n';
}

int cli(const std::string& args) {
    const std::string cmd = std::string(MCLOOP_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

SystemConfig short_config() {
    SystemConfig cfg;
    cfg.n_data_bits = 40;
    cfg.tail_time = 0.0;
    return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config loading") {
    const SystemConfig d = config_from_json(json::object());
    CHECK(loop_time(d.geometry) == doctest::Approx(41.3).epsilon(0.05 / 41.3));
    CHECK(config_digest(d) == config_digest(SystemConfig{}));

    CHECK_THROWS_AS(config_from_json(json::parse(R"({"geometry": {"q_flux": 0}})")), ConfigError);
    CHECK_NOTHROW(config_from_json(json::parse(R"({"dt_sim": 0.5, "dt_sample": 2, "d_mol": 1e-3})")));
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"dt_sim": 0.03})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"geometry": {"q_flux": "fast"}})")), ConfigError);

    try {
        config_from_json(json::parse(R"({"geometry": {"l_tubez": 1}})"));
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("l_tubez") != std::string::npos);
    }

    const fs::path bad = scratch("bad.json");
    write_file(bad, "{ not json");
    CHECK_THROWS_AS(load_config(bad), ConfigError);
    CHECK_THROWS_AS(load_config(scratch("missing.json")), IoError);

    SystemConfig c;
    c.modulation.t_guard = 0;
    c.seed = 99;
    c.geometry.reservoir_exchange = 1.0;
    const SystemConfig back = config_from_json(config_to_json(c));
    CHECK(config_digest(back) == config_digest(c));
    CHECK(config_digest(back) != config_digest(SystemConfig{}));
    CHECK(config_digest(c).size() == 16);
}

TEST_CASE("bit generation") {
    CHECK(generate_bits(500, 1) == generate_bits(500, 1));
    CHECK(generate_bits(500, 1) != generate_bits(500, 2));
    const Bits b = generate_bits(500, 1);
    CHECK(b.size() == 500);
    const double ones = static_cast<double>(std::count(b.begin(), b.end(), 1)) / 500.0;
    CHECK(ones == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::all_of(b.begin(), b.end(), [](auto x) { return x <= 1; }));

    const Bits full = with_pilot(PilotSpec{}, Bits{1, 1});
    CHECK(full.size() == 12);
    CHECK(full[10] == 1);
}

TEST_CASE("ideal channel detects a short sequence without errors") {
    // Memoryless trace: each symbol's frame depends on its own bit only.
    SystemConfig cfg;
    const Bits data = generate_bits(10, 3);
    ReceivedTrace tr;
    tr.dt_sample = cfg.dt_sample;
    const auto L = static_cast<std::size_t>(cfg.modulation.t_symbol() / cfg.dt_sample);
    for (auto b : with_pilot(cfg.pilot, data))
        for (std::size_t k = 0; k < L; ++k) tr.samples.push_back(b && k == 4 ? 0.27 : 0.3);
    tr.t_record = tr.dt_sample * static_cast<double>(tr.samples.size() - 1);
    const auto r = detect_trace(cfg, tr, data, "memoryless");
    CHECK(r.bd.tally->errors() == 0);
    CHECK(r.dd.tally->errors() == 0);
    CHECK(r.bd.k_p == 4);

    // Simulated, noise- and bleaching-free. The basic detector's threshold
    // sits exactly on the lowest pilot zero, so residual ISI of order 1e-6
    // can still flip it; the differential detector must be clean.
    cfg.noise_sigma = 0.0;
    cfg.kinetics.beta_bleach = 0.0;
    for (bool ex : {false, true}) {
        cfg.modulation.ex_enabled = ex;
        for (std::uint64_t seed : {1u, 2u, 3u}) CHECK(run_and_detect(cfg, generate_bits(10, seed)).dd.tally->errors() == 0);
    }
}

TEST_CASE("report contents") {
    const SystemConfig cfg = short_config();
    ReceivedTrace tr;
    const auto r = run_and_detect(cfg, generate_bits(cfg.n_data_bits, cfg.seed), &tr);
    CHECK(r.n_data_symbols == 40);
    CHECK(!tr.samples.empty());
    for (const auto* d : {&r.bd, &r.dd}) {
        REQUIRE(d->tally);
        CHECK(d->tally->errors_cumulative.size() == 40);
        CHECK(std::is_sorted(d->tally->errors_cumulative.begin(), d->tally->errors_cumulative.end()));
        CHECK(d->tally->ser == doctest::Approx(static_cast<double>(d->tally->errors()) / 40.0));
    }

    json j = report_to_json(r);
    CHECK(j.contains("schema_version"));
    CHECK(j["config_digest"] == config_digest(cfg));
    for (const char* k : {"bd", "dd"}) {
        CHECK(j["detectors"][k].contains("ser"));
        CHECK(j["detectors"][k].contains("threshold"));
        CHECK(j["detectors"][k].contains("k_p"));
    }

    // Same inputs give the same report up to the wall clock.
    json again = report_to_json(run_and_detect(cfg, generate_bits(cfg.n_data_bits, cfg.seed)));
    j.erase("wall_clock_s");
    again.erase("wall_clock_s");
    CHECK(j.dump() == again.dump());

    std::ostringstream csv;
    write_error_curves(csv, r);
    std::istringstream lines(csv.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == "symbol_index,errors_bd,errors_dd");
    std::size_t rows = 0;
    for (std::string l; std::getline(lines, l);) ++rows;
    CHECK(rows == 40);
}

TEST_CASE("BD trails DD on a long drifting run") {
    SystemConfig cfg;
    cfg.modulation.t_guard = 0.0;
    cfg.tail_time = 0.0;
    const auto r = run_and_detect(cfg, generate_bits(300, cfg.seed));
    CHECK(r.bd.tally->errors() > r.dd.tally->errors());
}

TEST_CASE("trace import") {
    const fs::path p = scratch("t1501.csv");
    write_rows(p, 1501, 2.0);
    const auto t = import_trace(p);
    CHECK(t.samples.size() == 1501);
    CHECK(t.dt_sample == doctest::Approx(2.0));

    write_rows(p, 200, 1.0);
    CHECK(import_trace(p).dt_sample == doctest::Approx(1.0));

    write_rows(p, 1, 2.0);
    CHECK_THROWS_AS(import_trace(p), IoError);

    write_file(p, "time_s,intensity\n0,1\n2,1\n1,1\n");
    CHECK_THROWS_AS(import_trace(p), IoError);
    write_file(p, "time_s,intensity\n0,1\n2,1\n4.5,1\n6,1\n");
    CHECK_THROWS_AS(import_trace(p), IoError);
    write_file(p, "time_s,intensity\n0,1\n2.01,1\n4,1\n6,1\n");
    CHECK_NOTHROW(import_trace(p));
    write_file(p, "t,i\n0,1\n2,1\n");
    CHECK_THROWS_AS(import_trace(p), IoError);
    write_file(p, "time_s,intensity\n0,1\n2,x\n");
    CHECK_THROWS_AS(import_trace(p), IoError);
    CHECK_THROWS_AS(import_trace(scratch("nope.csv")), IoError);
}

TEST_CASE("bits files") {
    const fs::path p = scratch("bits.txt");
    write_file(p, "0 1,1\n0\n");
    CHECK(read_bits(p) == Bits{0, 1, 1, 0});
    write_file(p, "012");
    CHECK_THROWS_AS(read_bits(p), IoError);
}

TEST_CASE("Monte Carlo") {
    SystemConfig cfg = short_config();
    const auto one = monte_carlo(cfg, 1, cfg.seed, {false, 1});
    const auto single = run_and_detect(cfg, generate_bits(cfg.n_data_bits, cfg.seed));
    CHECK(one.dd.ser.at(0) == single.dd.tally->ser);
    CHECK(one.bd.ser.at(0) == single.bd.tally->ser);

    cfg.noise_sigma = 0.0;
    const auto fixed = monte_carlo(cfg, 3, 5, {true, 0});
    CHECK(fixed.dd.min == fixed.dd.max);
    CHECK(fixed.bd.min == fixed.bd.max);

    const json j = monte_carlo_to_json(fixed);
    CHECK(j["detectors"]["dd"]["ser"].size() == 3);
}

TEST_CASE("SER does not grow as the noise vanishes") {
    SystemConfig cfg;
    cfg.kinetics.beta_bleach = 0.0;
    cfg.modulation.ex_enabled = true;
    cfg.n_data_bits = 30;
    cfg.tail_time = 0.0;
    cfg.n_cells = 1350;  // coarse grid keeps 96 runs affordable
    cfg.dt_sim = 0.05;
    double prev = 1.0;
    for (double s : {0.02, 0.01, 0.005, 0.0}) {
        cfg.noise_sigma = s;
        const double m = monte_carlo(cfg, 24, 1).dd.mean;
        CHECK(m <= prev);
        prev = m;
    }
    CHECK(prev < 0.01);
}

TEST_CASE("CLI exit codes") {
    const fs::path cfg = scratch("cli.json");
    write_file(cfg, R"({"n_data_bits": 10, "tail_time": 0})");
    CHECK(cli("run --config " + cfg.string() + " --out " + scratch("r.json").string()) == 0);
    std::ifstream in(scratch("r.json"));
    CHECK(json::parse(in)["detectors"].contains("dd"));

    write_file(cfg, R"({"geometry": {"q_flux": -1}})");
    CHECK(cli("run --config " + cfg.string()) == 2);
    CHECK(cli("run --bogus") == 2);

    write_file(cfg, R"({"concentration": 1e308, "kinetics": {"alpha_fluor": 1e308}, "n_data_bits": 2})");
    CHECK(cli("run --config " + cfg.string()) == 3);

    CHECK(cli("import-detect --trace " + scratch("absent.csv").string()) == 4);
    CHECK(cli("run --config " + scratch("absent.json").string()) == 4);
}

}
