#pragma once

// Domain types shared by all dynamics code. Units: hbar = 1 throughout.
// The oscillator has mass m and frequency w0; its natural scales are
//   X0 = (2 m w0)^(-1/2),  P0 = (m w0 / 2)^(1/2),  X0 * P0 = 1/2.

#include <cmath>
#include <string>
#include <variant>

#include "becmon/errors.hpp"

namespace becmon {

class PhysicalParams {
public:
    PhysicalParams() = default;

    PhysicalParams(double mass, double omega0) : mass_(mass), omega0_(omega0) {
        if (!(mass > 0.0) || !std::isfinite(mass))
            throw InvalidArgument("PhysicalParams: mass must be positive and finite");
        if (!(omega0 > 0.0) || !std::isfinite(omega0))
            throw InvalidArgument("PhysicalParams: omega0 must be positive and finite");
    }

    double mass() const noexcept { return mass_; }
    double omega0() const noexcept { return omega0_; }

    // X0
    double length_unit() const noexcept { return 1.0 / std::sqrt(2.0 * mass_ * omega0_); }
    // P0
    double momentum_unit() const noexcept { return std::sqrt(0.5 * mass_ * omega0_); }

    // Physical time for a dimensionless tau = w0 t.
    double time_of(double tau) const noexcept { return tau / omega0_; }

    friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;

private:
    double mass_ = 1.0;
    double omega0_ = 1.0;
};

// The five tracked expectation values <X>, <P>, <X^2>, <P^2>, <XP+PX>.
struct OscillatorMoments {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double mean_x2 = 0.0;
    double mean_p2 = 0.0;
    double mean_xp_sym = 0.0;

    double var_x() const noexcept { return mean_x2 - mean_x * mean_x; }
    double var_p() const noexcept { return mean_p2 - mean_p * mean_p; }
    // Symmetrised covariance (<XP+PX>/2 - <X><P>).
    double cov_xp() const noexcept { return 0.5 * mean_xp_sym - mean_x * mean_p; }
    double uncertainty_product() const noexcept { return var_x() * var_p(); }

    friend bool operator==(const OscillatorMoments&, const OscillatorMoments&) = default;
};

enum class CouplingKind {
    Position,         // A = X / X0
    PositionSquared,  // A = X^2 / X0^2
};

inline std::string to_string(CouplingKind kind) {
    return kind == CouplingKind::Position ? "position" : "position_squared";
}

struct CoherentState {
    double mean_x0 = 0.0;
    double mean_p0 = 0.0;

    friend bool operator==(const CoherentState&, const CoherentState&) = default;
};

using InitialState = std::variant<CoherentState, OscillatorMoments>;

// Relative slack allowed on var_x * var_p >= 1/4.
inline constexpr double kUncertaintyTolerance = 1e-9;

inline OscillatorMoments coherent_state_moments(const PhysicalParams& params, double mean_x0,
                                                double mean_p0) {
    const double x0 = params.length_unit();
    const double p0 = params.momentum_unit();
    return OscillatorMoments{
        .mean_x = mean_x0,
        .mean_p = mean_p0,
        .mean_x2 = x0 * x0 + mean_x0 * mean_x0,
        .mean_p2 = p0 * p0 + mean_p0 * mean_p0,
        .mean_xp_sym = 2.0 * mean_x0 * mean_p0,
    };
}

// Throws InvalidArgument unless the moments describe a physical state.
inline void validate_moments(const OscillatorMoments& m) {
    const bool finite = std::isfinite(m.mean_x) && std::isfinite(m.mean_p) &&
                        std::isfinite(m.mean_x2) && std::isfinite(m.mean_p2) &&
                        std::isfinite(m.mean_xp_sym);
    if (!finite) throw InvalidArgument("moments: non-finite value");
    if (m.var_x() < 0.0) throw InvalidArgument("moments: negative position variance");
    if (m.var_p() < 0.0) throw InvalidArgument("moments: negative momentum variance");
    if (m.uncertainty_product() < 0.25 * (1.0 - kUncertaintyTolerance))
        throw InvalidArgument("moments: var_x * var_p below 1/4 violates the uncertainty relation");
}

inline OscillatorMoments initial_moments(const PhysicalParams& params, const InitialState& init) {
    if (const auto* coherent = std::get_if<CoherentState>(&init))
        return coherent_state_moments(params, coherent->mean_x0, coherent->mean_p0);
    const auto& raw = std::get<OscillatorMoments>(init);
    validate_moments(raw);
    return raw;
}

// Moments in units of X0, P0, X0^2, P0^2 and X0*P0.
inline OscillatorMoments nondimensionalize(const PhysicalParams& params,
                                           const OscillatorMoments& m) {
    const double x0 = params.length_unit();
    const double p0 = params.momentum_unit();
    return {m.mean_x / x0, m.mean_p / p0, m.mean_x2 / (x0 * x0), m.mean_p2 / (p0 * p0),
            m.mean_xp_sym / (x0 * p0)};
}

inline OscillatorMoments redimensionalize(const PhysicalParams& params,
                                          const OscillatorMoments& m) {
    const double x0 = params.length_unit();
    const double p0 = params.momentum_unit();
    return {m.mean_x * x0, m.mean_p * p0, m.mean_x2 * (x0 * x0), m.mean_p2 * (p0 * p0),
            m.mean_xp_sym * (x0 * p0)};
}

}  // namespace becmon
