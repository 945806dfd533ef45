#include "mcloop/config.hpp"

#include "mcloop/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string_view>
#include <utility>

namespace mcloop {

using nlohmann::json;

void ModulationParams::validate() const {
    auto fail = [](const char* field, const char* what) {
        throw ConfigError(std::string("modulation.") + field + ": " + what);
    };
    if (!(std::isfinite(t_irradiation) && t_irradiation > 0.0)) fail("t_irradiation", "must be > 0");
    if (!(std::isfinite(t_guard) && t_guard >= 0.0)) fail("t_guard", "must be >= 0");
    if (!(std::isfinite(tx_intensity_max) && tx_intensity_max >= 0.0))
        fail("tx_intensity_max", "must be >= 0");
    if (!(std::isfinite(ex_intensity) && ex_intensity >= 0.0)) fail("ex_intensity", "must be >= 0");
    if (!std::isfinite(ex_start)) fail("ex_start", "must be finite");
    if (!(std::isfinite(rx_intensity) && rx_intensity > 0.0)) fail("rx_intensity", "must be > 0");
}

void PilotSpec::validate() const {
    if (bits.size() < 2) throw ConfigError("pilot.bits: need at least 2 symbols");
    bool has_one = false;
    bool has_repeat = false;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] > 1) throw ConfigError("pilot.bits: entries must be 0 or 1");
        has_one = has_one || bits[i] == 1;
        if (i > 0 && bits[i] == bits[i - 1]) has_repeat = true;
    }
    if (!has_one) throw ConfigError("pilot.bits: must contain at least one 1");
    if (!has_repeat) throw ConfigError("pilot.bits: must contain a repeated consecutive bit");
}

std::size_t SystemConfig::steps_per_sample() const {
    if (!(dt_sim > 0.0)) throw ConfigError("dt_sim: must be > 0");
    if (!(dt_sample > 0.0)) throw ConfigError("dt_sample: must be > 0");
    const double ratio = dt_sample / dt_sim;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
        throw ConfigError("dt_sim: must divide dt_sample");
    return static_cast<std::size_t>(rounded);
}

double SystemConfig::dispersion() const {
    return taylor_aris_dispersion(geometry.r_tube, effective_velocity(geometry), d_mol);
}

void SystemConfig::validate() const {
    geometry.validate();
    kinetics.validate();
    modulation.validate();
    pilot.validate();
    steps_per_sample();
    if (!(std::isfinite(concentration) && concentration > 0.0))
        throw ConfigError("concentration: must be > 0");
    if (!(std::isfinite(noise_sigma) && noise_sigma >= 0.0))
        throw ConfigError("noise_sigma: must be >= 0");
    if (!(std::isfinite(d_mol) && d_mol > 0.0)) throw ConfigError("d_mol: must be > 0");
    if (n_cells < 10) throw ConfigError("n_cells: must be >= 10");
    if (!(std::isfinite(tail_time) && tail_time >= 0.0))
        throw ConfigError("tail_time: must be >= 0");
    if (n_data_bits < 1) throw ConfigError("n_data_bits: must be >= 1");
}

namespace {

struct Field {
    std::string_view name;
    std::function<void(const json&)> assign;
};

void apply_fields(const json& obj, const std::string& section, const std::vector<Field>& fields) {
    if (!obj.is_object())
        throw ConfigError((section.empty() ? std::string("config") : section) + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        const std::string qualified = section.empty() ? key : section + "." + key;
        const Field* match = nullptr;
        for (const auto& f : fields)
            if (f.name == key) match = &f;
        if (!match) throw ConfigError(qualified + ": unknown key");
        try {
            match->assign(value);
        } catch (const json::exception& e) {
            throw ConfigError(qualified + ": " + e.what());
        } catch (const ConfigError& e) {
            const std::string_view msg = e.what();
            if (msg.substr(0, qualified.size()) == qualified) throw;
            throw ConfigError(qualified + ": " + std::string(msg));
        }
    }
}

template <typename T>
Field field(std::string_view name, T& target) {
    return {name, [&target](const json& v) {
                if constexpr (std::is_same_v<T, double>) {
                    if (!v.is_number()) throw ConfigError("expected a number");
                } else if constexpr (std::is_same_v<T, bool>) {
                    if (!v.is_boolean()) throw ConfigError("expected true or false");
                } else {
                    if (!v.is_number_unsigned()) throw ConfigError("expected a nonnegative integer");
                }
                target = v.get<T>();
            }};
}

Bits parse_bits(const json& v) {
    if (!v.is_array()) throw ConfigError("expected an array of 0/1");
    Bits bits;
    for (const auto& b : v) {
        if (!b.is_number_unsigned() || b.get<unsigned>() > 1)
            throw ConfigError("bits must be 0 or 1");
        bits.push_back(static_cast<std::uint8_t>(b.get<unsigned>()));
    }
    return bits;
}

}  // namespace

SystemConfig config_from_json(const json& doc) {
    SystemConfig cfg;
    auto& g = cfg.geometry;
    auto& k = cfg.kinetics;
    auto& m = cfg.modulation;

    apply_fields(doc, "", {
        {"geometry", [&](const json& v) {
             apply_fields(v, "geometry", {
                 field("r_tube", g.r_tube), field("l_tube", g.l_tube),
                 field("v_reservoir", g.v_reservoir), field("v_pumpflowcell", g.v_pumpflowcell),
                 field("q_flux", g.q_flux), field("l_tx", g.l_tx), field("l_ex", g.l_ex),
                 field("l_rx", g.l_rx), field("d_tx_rx", g.d_tx_rx),
                 field("reservoir_exchange", g.reservoir_exchange)});
         }},
        {"kinetics", [&](const json& v) {
             apply_fields(v, "kinetics", {
                 field("t_half", k.t_half), field("sigma_off", k.sigma_off),
                 field("sigma_on", k.sigma_on), field("beta_bleach", k.beta_bleach),
                 field("epsilon_off", k.epsilon_off), field("alpha_fluor", k.alpha_fluor)});
         }},
        {"modulation", [&](const json& v) {
             apply_fields(v, "modulation", {
                 field("t_irradiation", m.t_irradiation), field("t_guard", m.t_guard),
                 field("tx_intensity_max", m.tx_intensity_max), field("ex_enabled", m.ex_enabled),
                 field("ex_intensity", m.ex_intensity), field("ex_start", m.ex_start),
                 field("rx_intensity", m.rx_intensity)});
         }},
        {"pilot", [&](const json& v) {
             apply_fields(v, "pilot", {{"bits", [&](const json& b) { cfg.pilot.bits = parse_bits(b); }}});
         }},
        field("concentration", cfg.concentration),
        field("dt_sim", cfg.dt_sim),
        field("dt_sample", cfg.dt_sample),
        field("noise_sigma", cfg.noise_sigma),
        field("d_mol", cfg.d_mol),
        field("n_cells", cfg.n_cells),
        field("seed", cfg.seed),
        field("tail_time", cfg.tail_time),
        field("n_data_bits", cfg.n_data_bits),
    });
    cfg.validate();
    return cfg;
}

json config_to_json(const SystemConfig& cfg) {
    const auto& g = cfg.geometry;
    const auto& k = cfg.kinetics;
    const auto& m = cfg.modulation;
    json pilot_bits = json::array();
    for (auto b : cfg.pilot.bits) pilot_bits.push_back(static_cast<unsigned>(b));
    return {
        {"geometry", {{"r_tube", g.r_tube}, {"l_tube", g.l_tube}, {"v_reservoir", g.v_reservoir},
                      {"v_pumpflowcell", g.v_pumpflowcell}, {"q_flux", g.q_flux},
                      {"l_tx", g.l_tx}, {"l_ex", g.l_ex}, {"l_rx", g.l_rx},
                      {"d_tx_rx", g.d_tx_rx}, {"reservoir_exchange", g.reservoir_exchange}}},
        {"kinetics", {{"t_half", k.t_half}, {"sigma_off", k.sigma_off}, {"sigma_on", k.sigma_on},
                      {"beta_bleach", k.beta_bleach}, {"epsilon_off", k.epsilon_off},
                      {"alpha_fluor", k.alpha_fluor}}},
        {"modulation", {{"t_irradiation", m.t_irradiation}, {"t_guard", m.t_guard},
                        {"tx_intensity_max", m.tx_intensity_max}, {"ex_enabled", m.ex_enabled},
                        {"ex_intensity", m.ex_intensity}, {"ex_start", m.ex_start},
                        {"rx_intensity", m.rx_intensity}}},
        {"pilot", {{"bits", pilot_bits}}},
        {"concentration", cfg.concentration},
        {"dt_sim", cfg.dt_sim},
        {"dt_sample", cfg.dt_sample},
        {"noise_sigma", cfg.noise_sigma},
        {"d_mol", cfg.d_mol},
        {"n_cells", cfg.n_cells},
        {"seed", cfg.seed},
        {"tail_time", cfg.tail_time},
        {"n_data_bits", cfg.n_data_bits},
    };
}

SystemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

std::string config_digest(const SystemConfig& cfg) {
    const std::string text = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mcloop
