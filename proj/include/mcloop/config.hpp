#pragma once

#include "mcloop/loop_channel.hpp"
#include "mcloop/photophysics.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mcloop {

using Bits = std::vector<std::uint8_t>;

struct ModulationParams {
    double t_irradiation = 10.0;    // T_I [s]
    double t_guard = 20.0;          // T_G [s]
    double tx_intensity_max = 1.0;  // normalized 405 nm intensity
    bool ex_enabled = false;
    double ex_intensity = 1.0;      // normalized 365 nm intensity
    double ex_start = 0.0;          // [s]
    double rx_intensity = 1.0;      // 500 nm excitation, always on

    double t_symbol() const { return t_irradiation + t_guard; }
    void validate() const;
};

struct PilotSpec {
    Bits bits{0, 1, 1, 1, 0, 0, 1, 1, 0, 0};

    std::size_t size() const { return bits.size(); }
    void validate() const;
};

struct SystemConfig {
    LoopGeometry geometry;
    KineticsParams kinetics;
    ModulationParams modulation;
    PilotSpec pilot;
    double concentration = 0.3;   // initial ON concentration [kg/m^3] (= mg/mL)
    double dt_sim = 0.02;         // [s]
    double dt_sample = 2.0;       // [s]
    double noise_sigma = 0.003;   // std. dev. as a fraction of the initial reading
    double d_mol = 9e-6;          // diffusivity in the Taylor-Aris closure [m^2/s]
    std::size_t n_cells = 2700;
    std::uint64_t seed = 1;
    double tail_time = 60.0;      // recorded after the last symbol [s]
    std::size_t n_data_bits = 500;

    /// Integer number of simulation steps per sample; throws ConfigError if
    /// dt_sim does not divide dt_sample.
    std::size_t steps_per_sample() const;
    double dispersion() const;
    void validate() const;
};

/// Throws ConfigError with a field-qualified message on unknown keys, wrong
/// types or violated invariants. Absent keys keep their defaults.
SystemConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const SystemConfig& cfg);

/// Throws IoError if unreadable, ConfigError on parse/validation failure.
SystemConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_digest(const SystemConfig& cfg);

}  // namespace mcloop
