#pragma once

// Exact per-branch evolution of the five moments under the branch
// Hamiltonians H(eps) = H_osc + eps A, and their weighted average.
//
// Every branch Hamiltonian is quadratic,
//   H = P^2/2m + m w^2 (X - c)^2 / 2 + const,
// so the moments rotate in phase space about the centre c:
//   Y = X - c,  Y(t) = Y cos(wt) + P sin(wt)/(m w),  P(t) = P cos(wt) - m w Y sin(wt).

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "becmon/core.hpp"
#include "becmon/ensemble.hpp"
#include "becmon/errors.hpp"
#include "becmon/numerics.hpp"

namespace becmon {

// Branches with w(eps)/w0 below this are treated as broken up.
inline constexpr double kMinRelativeFrequency = 1e-6;

// Harmonic motion with frequency `omega` about `centre` for physical time t.
inline OscillatorMoments rotate_moments(const OscillatorMoments& m, double centre, double omega,
                                        double mass, double t) {
    // Shift to the centre of the potential.
    const double y = m.mean_x - centre;
    const double y2 = m.mean_x2 - 2.0 * centre * m.mean_x + centre * centre;
    const double yp = m.mean_xp_sym - 2.0 * centre * m.mean_p;

    const double phase = omega * t;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const double mw = mass * omega;

    const double y_t = c * y + s / mw * m.mean_p;
    const double p_t = c * m.mean_p - mw * s * y;
    const double y2_t = c * c * y2 + (s * s) / (mw * mw) * m.mean_p2 + c * s / mw * yp;
    const double p2_t = c * c * m.mean_p2 + mw * mw * s * s * y2 - mw * c * s * yp;
    const double yp_t = (c * c - s * s) * yp + 2.0 * c * s * (m.mean_p2 / mw - mw * y2);

    return OscillatorMoments{
        .mean_x = y_t + centre,
        .mean_p = p_t,
        .mean_x2 = y2_t + 2.0 * centre * y_t + centre * centre,
        .mean_p2 = p2_t,
        .mean_xp_sym = yp_t + 2.0 * centre * p_t,
    };
}

// Shift of the potential minimum for A = X/X0: dx = sqrt(2/(m w0)) eps / w0.
inline double branch_shift(double epsilon, const PhysicalParams& params) {
    const double w0 = params.omega0();
    return std::sqrt(2.0 / (params.mass() * w0)) * epsilon / w0;
}

// Free evolution (no coupling) for dimensionless time tau = w0 t.
inline OscillatorMoments evolve_free(double tau, const OscillatorMoments& init,
                                     const PhysicalParams& params = {}) {
    return rotate_moments(init, 0.0, params.omega0(), params.mass(), params.time_of(tau));
}

// Branch of the position coupling: frequency w0, minimum moved to -dx.
inline OscillatorMoments evolve_branch_shifted(double epsilon, double tau,
                                               const OscillatorMoments& init,
                                               const PhysicalParams& params = {}) {
    return rotate_moments(init, -branch_shift(epsilon, params), params.omega0(), params.mass(),
                          params.time_of(tau));
}

// Branch of the X^2 coupling: frequency w = sqrt(w0^2 + 4 eps w0), same centre.
inline OscillatorMoments evolve_branch_frequency(double epsilon, double tau,
                                                 const OscillatorMoments& init,
                                                 const PhysicalParams& params = {}) {
    const double w0 = params.omega0();
    const double omega = branch_frequency(epsilon, w0);
    if (!(omega >= kMinRelativeFrequency * w0))
        throw BreakupRegime("evolve_branch_frequency: eps=" + std::to_string(epsilon) +
                                " gives w/w0 below " + std::to_string(kMinRelativeFrequency) +
                                " (breakup at eps <= -omega0/4)",
                            -1, epsilon);
    return rotate_moments(init, 0.0, omega, params.mass(), params.time_of(tau));
}

inline OscillatorMoments evolve_branch(CouplingKind coupling, double epsilon, double tau,
                                       const OscillatorMoments& init,
                                       const PhysicalParams& params = {}) {
    return coupling == CouplingKind::Position
               ? evolve_branch_shifted(epsilon, tau, init, params)
               : evolve_branch_frequency(epsilon, tau, init, params);
}

// sum_n P_n <O>_n(tau). Variances derived from the result are mixture
// variances. Zero-weight branches are skipped, so a truncated ensemble may
// contain repeller branches as long as they carry no weight.
inline OscillatorMoments ensemble_average(const BecEnsemble& ensemble, CouplingKind coupling,
                                          double tau, const OscillatorMoments& init,
                                          const PhysicalParams& params = {}) {
    numerics::CompensatedSum x, p, x2, p2, xp;
    const auto& entries = ensemble.entries();
    for (std::size_t n = 0; n < entries.size(); ++n) {
        const auto& entry = entries[n];
        if (entry.weight == 0.0) continue;
        OscillatorMoments branch;
        try {
            branch = evolve_branch(coupling, entry.epsilon, tau, init, params);
        } catch (const BreakupRegime& e) {
            throw BreakupRegime("ensemble_average: branch n=" + std::to_string(n) + " with eps=" +
                                    std::to_string(entry.epsilon) + " and weight " +
                                    std::to_string(entry.weight) + " is in the breakup regime",
                                static_cast<long>(n), entry.epsilon);
        }
        x += entry.weight * branch.mean_x;
        p += entry.weight * branch.mean_p;
        x2 += entry.weight * branch.mean_x2;
        p2 += entry.weight * branch.mean_p2;
        xp += entry.weight * branch.mean_xp_sym;
    }
    return {x.value(), p.value(), x2.value(), p2.value(), xp.value()};
}

// Copy of `ensemble` with the X^2-coupling repeller branches (w/w0 below the
// guard) zeroed out and not renormalised, the discrete counterpart of cutting
// the continuum integrals at z = -1. Throws BreakupRegime if the dropped
// weight exceeds `max_dropped_weight`.
inline BecEnsemble drop_breakup_branches(const BecEnsemble& ensemble, const PhysicalParams& params,
                                         double max_dropped_weight) {
    std::vector<EnsembleEntry> kept = ensemble.entries();
    numerics::CompensatedSum dropped;
    long worst_index = -1;
    for (std::size_t n = 0; n < kept.size(); ++n) {
        const double omega = branch_frequency(kept[n].epsilon, params.omega0());
        if (omega >= kMinRelativeFrequency * params.omega0()) continue;
        if (kept[n].weight > 0.0 && worst_index < 0) worst_index = static_cast<long>(n);
        dropped += kept[n].weight;
        kept[n].weight = 0.0;
    }
    if (dropped.value() > max_dropped_weight)
        throw BreakupRegime("drop_breakup_branches: repeller branches carry weight " +
                                std::to_string(dropped.value()) + " > " +
                                std::to_string(max_dropped_weight),
                            worst_index, worst_index >= 0 ? ensemble.entries()[worst_index].epsilon : 0.0);
    return BecEnsemble(std::move(kept), ensemble.n_atoms(), ensemble.delta_omega());
}

// Total weight of the X^2-coupling repeller branches.
inline double discrete_breakup_weight(const BecEnsemble& ensemble, const PhysicalParams& params) {
    numerics::CompensatedSum dropped;
    for (const auto& e : ensemble.entries())
        if (!(branch_frequency(e.epsilon, params.omega0()) >= kMinRelativeFrequency * params.omega0()))
            dropped += e.weight;
    return dropped.value();
}

inline std::vector<OscillatorMoments> ensemble_trajectory(const BecEnsemble& ensemble,
                                                          CouplingKind coupling,
                                                          std::span<const double> taus,
                                                          const OscillatorMoments& init,
                                                          const PhysicalParams& params = {}) {
    std::vector<OscillatorMoments> out;
    out.reserve(taus.size());
    for (double tau : taus) out.push_back(ensemble_average(ensemble, coupling, tau, init, params));
    return out;
}

// Position coupling averaged over any eps-symmetric ensemble with
// sum_n P_n eps_n^2 = kappa^2: means follow the free trajectory and
//   var_x = var_x,free + 4 sigma_X^2 sin^4(tau/2),
//   var_p = var_p,free + sigma_P^2 sin^2(tau),
// with sigma_X = sqrt(2/(m w0)) kappa/w0 and sigma_P = m w0 sigma_X.
inline OscillatorMoments closed_form_breathing(double kappa, double tau,
                                               const OscillatorMoments& init,
                                               const PhysicalParams& params = {}) {
    if (!(kappa >= 0.0)) throw InvalidArgument("closed_form_breathing: kappa must be >= 0");
    const double mw0 = params.mass() * params.omega0();
    const double sigma_x = branch_shift(kappa, params);
    const double sigma_p = mw0 * sigma_x;

    OscillatorMoments m = evolve_free(tau, init, params);
    const double half = std::sin(0.5 * tau);
    const double s = std::sin(tau);
    // Branch means deviate from the free ones by -dx (1 - cos tau) and -m w0 dx sin tau.
    const double one_minus_cos = 2.0 * half * half;
    m.mean_x2 += 4.0 * sigma_x * sigma_x * half * half * half * half;
    m.mean_p2 += sigma_p * sigma_p * s * s;
    m.mean_xp_sym += 2.0 * mw0 * sigma_x * sigma_x * one_minus_cos * s;
    return m;
}

}  // namespace becmon
