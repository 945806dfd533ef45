#pragma once

// Population kinetics of a reversibly photoswitchable fluorescent protein.
//
// Three pools per volume element: ON (bright), OFF (dim) and BLEACHED
// (permanently dark). 405 nm light drives ON -> OFF, 365 nm light and
// thermal relaxation drive OFF -> ON, and every light source bleaches both
// switchable pools at a rate proportional to its intensity.

namespace mcloop {

struct SpeciesState {
    double on = 0.0;
    double off = 0.0;
    double bleached = 0.0;

    double total() const { return on + off + bleached; }

    SpeciesState& operator+=(const SpeciesState& o) {
        on += o.on;
        off += o.off;
        bleached += o.bleached;
        return *this;
    }
    SpeciesState& operator-=(const SpeciesState& o) {
        on -= o.on;
        off -= o.off;
        bleached -= o.bleached;
        return *this;
    }
    SpeciesState& operator*=(double s) {
        on *= s;
        off *= s;
        bleached *= s;
        return *this;
    }
    friend SpeciesState operator+(SpeciesState a, const SpeciesState& b) { return a += b; }
    friend SpeciesState operator-(SpeciesState a, const SpeciesState& b) { return a -= b; }
    friend SpeciesState operator*(SpeciesState a, double s) { return a *= s; }
    friend SpeciesState operator*(double s, SpeciesState a) { return a *= s; }
    friend bool operator==(const SpeciesState&, const SpeciesState&) = default;
};

struct KineticsParams {
    double t_half = 600.0;       // thermal OFF -> ON half-life [s]
    double sigma_off = 0.025;    // ON -> OFF rate per unit 405 nm intensity
    double sigma_on = 0.1;       // OFF -> ON rate per unit 365 nm intensity
    double beta_bleach = 2e-5;   // bleaching rate per unit intensity, any source
    double epsilon_off = 0.1;    // residual brightness of the OFF state
    double alpha_fluor = 1.0;    // emission per concentration per excitation intensity

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Intensities seen by one volume element during a step.
struct Irradiation {
    double i_405 = 0.0;  // transmitter
    double i_365 = 0.0;  // eraser
    double i_500 = 0.0;  // receiver excitation (bleaches, does not switch)
};

/// ln(2) / t_half. Throws std::domain_error for t_half <= 0.
double relaxation_rate(double t_half);

/// Exact solution operator of the frozen-coefficient rate system over one
/// step. Columns of the ON/OFF block sum to one, so the only loss from the
/// switchable pools is the bleaching factor, which is credited to `bleached`.
class KineticsPropagator {
public:
    KineticsPropagator() = default;
    KineticsPropagator(const KineticsParams& params, const Irradiation& light, double dt);

    SpeciesState apply(const SpeciesState& s) const {
        const double on = stay_on_ * s.on + to_on_ * s.off;
        const double off = to_off_ * s.on + stay_off_ * s.off;
        const double active = on + off;
        return {on * survive_, off * survive_, s.bleached + active * bleach_fraction_};
    }

    bool is_identity() const { return identity_; }

private:
    double stay_on_ = 1.0;
    double to_on_ = 0.0;
    double to_off_ = 0.0;
    double stay_off_ = 1.0;
    double survive_ = 1.0;
    double bleach_fraction_ = 0.0;
    bool identity_ = true;
};

/// One exponential-Euler step of the ON/OFF/BLEACHED rate system.
SpeciesState step_kinetics(const SpeciesState& state, const KineticsParams& params, double i_405,
                           double i_365, double dt, double i_500 = 0.0);

/// alpha * i_exc * (on + epsilon_off * off); bleached molecules are dark.
double fluorescence(const SpeciesState& state, const KineticsParams& params, double i_exc);

}  // namespace mcloop
