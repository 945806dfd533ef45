#include "mcloop/photophysics.hpp"

#include "mcloop/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mcloop {

void KineticsParams::validate() const {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(std::string("kinetics.") + field + ": " + what);
    };
    require(std::isfinite(t_half) && t_half > 0.0, "t_half", "must be > 0");
    require(std::isfinite(sigma_off) && sigma_off >= 0.0, "sigma_off", "must be >= 0");
    require(std::isfinite(sigma_on) && sigma_on >= 0.0, "sigma_on", "must be >= 0");
    require(std::isfinite(beta_bleach) && beta_bleach >= 0.0, "beta_bleach", "must be >= 0");
    require(epsilon_off >= 0.0 && epsilon_off < 1.0, "epsilon_off", "must lie in [0, 1)");
    require(std::isfinite(alpha_fluor) && alpha_fluor >= 0.0, "alpha_fluor", "must be >= 0");
}

double relaxation_rate(double t_half) {
    if (!(t_half > 0.0)) throw std::domain_error("relaxation_rate: t_half must be > 0");
    return std::numbers::ln2 / t_half;
}

KineticsPropagator::KineticsPropagator(const KineticsParams& params, const Irradiation& light,
                                       double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("kinetics step: dt must be > 0");
    if (light.i_405 < 0.0 || light.i_365 < 0.0 || light.i_500 < 0.0)
        throw std::invalid_argument("kinetics step: intensities must be >= 0");

    const double k_off = params.sigma_off * light.i_405;
    const double k_on = params.sigma_on * light.i_365 + relaxation_rate(params.t_half);
    const double k_bleach = params.beta_bleach * (light.i_405 + light.i_365 + light.i_500);
    const double k_switch = k_off + k_on;

    // g = (1 - exp(-k dt)) / k, continuous at k = 0.
    const double g = k_switch > 0.0 ? -std::expm1(-k_switch * dt) / k_switch : dt;
    stay_on_ = 1.0 - k_off * g;
    to_off_ = k_off * g;
    to_on_ = k_on * g;
    stay_off_ = 1.0 - k_on * g;

    bleach_fraction_ = -std::expm1(-k_bleach * dt);
    survive_ = 1.0 - bleach_fraction_;
    identity_ = k_switch == 0.0 && k_bleach == 0.0;
}

SpeciesState step_kinetics(const SpeciesState& state, const KineticsParams& params, double i_405,
                           double i_365, double dt, double i_500) {
    if (state.on < 0.0 || state.off < 0.0 || state.bleached < 0.0)
        throw std::invalid_argument("step_kinetics: negative population");
    return KineticsPropagator(params, {i_405, i_365, i_500}, dt).apply(state);
}

double fluorescence(const SpeciesState& state, const KineticsParams& params, double i_exc) {
    if (i_exc < 0.0) throw std::invalid_argument("fluorescence: excitation must be >= 0");
    return params.alpha_fluor * i_exc * (state.on + params.epsilon_off * state.off);
}

}  // namespace mcloop
