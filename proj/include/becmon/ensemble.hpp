#pragma once

// Branch couplings eps_n and weights P_n of the condensate meter, plus the
// continuum densities P(eps) reached in the irreversible limit
// N -> inf, dOmega -> 0 with kappa = dOmega * sqrt(N) fixed.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "becmon/core.hpp"
#include "becmon/errors.hpp"
#include "becmon/numerics.hpp"
#include "becmon/quadrature.hpp"

namespace becmon {

inline constexpr long kDefaultMaxAtoms = 1'000'000;

struct EnsembleEntry {
    double epsilon = 0.0;  // eps_n = dOmega * (N - 2n)
    double weight = 0.0;   // P_n
};

class BecEnsemble {
public:
    BecEnsemble(std::vector<EnsembleEntry> entries, long n_atoms, double delta_omega)
        : entries_(std::move(entries)), n_atoms_(n_atoms), delta_omega_(delta_omega) {}

    const std::vector<EnsembleEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    long n_atoms() const noexcept { return n_atoms_; }
    double delta_omega() const noexcept { return delta_omega_; }

    double total_weight() const {
        numerics::CompensatedSum sum;
        for (const auto& e : entries_) sum += e.weight;
        return sum.value();
    }

    // sum_n P_n eps_n
    double mean_epsilon() const {
        numerics::CompensatedSum sum;
        for (const auto& e : entries_) sum += e.weight * e.epsilon;
        return sum.value();
    }

    // sum_n P_n eps_n^2; equals kappa^2 = dOmega^2 N for the binomial weights.
    double second_moment_epsilon() const {
        numerics::CompensatedSum sum;
        for (const auto& e : entries_) sum += e.weight * e.epsilon * e.epsilon;
        return sum.value();
    }

    std::size_t nonzero_count() const {
        std::size_t count = 0;
        for (const auto& e : entries_) count += e.weight > 0.0 ? 1 : 0;
        return count;
    }

private:
    std::vector<EnsembleEntry> entries_;
    long n_atoms_;
    double delta_omega_;
};

namespace detail {

inline void check_ensemble_args(long n_atoms, double delta_omega, long max_atoms) {
    if (n_atoms < 1) throw InvalidArgument("ensemble: n_atoms must be >= 1");
    if (n_atoms > max_atoms)
        throw InvalidArgument("ensemble: n_atoms " + std::to_string(n_atoms) +
                              " exceeds the configured maximum " + std::to_string(max_atoms));
    if (!(delta_omega > 0.0) || !std::isfinite(delta_omega))
        throw InvalidArgument("ensemble: delta_omega must be positive and finite");
}

inline double branch_epsilon(long n_atoms, long n, double delta_omega) {
    return delta_omega * static_cast<double>(n_atoms - 2 * n);
}

}  // namespace detail

// P_n = N! / (2^N (N-n)! n!), evaluated through log-gamma differences and
// mirrored so that P_n == P_{N-n} holds bit for bit.
inline BecEnsemble binomial_ensemble(long n_atoms, double delta_omega,
                                     long max_atoms = kDefaultMaxAtoms) {
    detail::check_ensemble_args(n_atoms, delta_omega, max_atoms);
    const auto size = static_cast<std::size_t>(n_atoms) + 1;
    std::vector<EnsembleEntry> entries(size);

    const double log_norm = std::lgamma(static_cast<double>(n_atoms) + 1.0) -
                            static_cast<double>(n_atoms) * std::numbers::ln2;
    for (long n = 0; 2 * n <= n_atoms; ++n) {
        const double log_w = log_norm - std::lgamma(static_cast<double>(n) + 1.0) -
                             std::lgamma(static_cast<double>(n_atoms - n) + 1.0);
        const double w = std::exp(log_w);
        entries[n].weight = w;
        entries[n_atoms - n].weight = w;
    }

    numerics::CompensatedSum total;
    for (const auto& e : entries) total += e.weight;
    const double scale = 1.0 / total.value();
    for (long n = 0; n <= n_atoms; ++n) {
        entries[n].weight *= scale;
        entries[n].epsilon = detail::branch_epsilon(n_atoms, n, delta_omega);
    }
    return BecEnsemble(std::move(entries), n_atoms, delta_omega);
}

// Branch frequency w(eps) = sqrt(w0^2 + 4 eps w0) under X^2 coupling; NaN
// when the branch is a repeller.
inline double branch_frequency(double epsilon, double omega0) {
    const double w2 = omega0 * omega0 + 4.0 * epsilon * omega0;
    return w2 >= 0.0 ? std::sqrt(w2) : std::numeric_limits<double>::quiet_NaN();
}

// Weights proportional to exp(-alpha w_n) on the branches n >= N/2 (eps_n <= 0,
// midpoint included for even N) and zero elsewhere.
inline BecEnsemble truncated_exponential_ensemble(long n_atoms, double delta_omega, double alpha,
                                                  const PhysicalParams& params = {},
                                                  long max_atoms = kDefaultMaxAtoms) {
    detail::check_ensemble_args(n_atoms, delta_omega, max_atoms);
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw InvalidArgument("truncated_exponential_ensemble: alpha must be positive and finite");

    const double omega0 = params.omega0();
    const double deepest = detail::branch_epsilon(n_atoms, n_atoms, delta_omega);
    if (deepest <= -0.25 * omega0)
        throw BreakupRegime("truncated_exponential_ensemble: branch n=" + std::to_string(n_atoms) +
                                " has eps=" + std::to_string(deepest) +
                                " <= -omega0/4 (delta_omega * N must stay below omega0/4)",
                            n_atoms, deepest);

    const long first = (n_atoms + 1) / 2;  // ceil(N/2)
    const auto size = static_cast<std::size_t>(n_atoms) + 1;
    std::vector<EnsembleEntry> entries(size);
    // exp(-alpha w) is largest at the lowest frequency (n = N); shift by it.
    const double w_min = branch_frequency(deepest, omega0);
    numerics::CompensatedSum total;
    for (long n = 0; n <= n_atoms; ++n) {
        entries[n].epsilon = detail::branch_epsilon(n_atoms, n, delta_omega);
        if (n >= first) {
            const double w = branch_frequency(entries[n].epsilon, omega0);
            entries[n].weight = std::exp(-alpha * (w - w_min));
            total += entries[n].weight;
        }
    }
    const double scale = 1.0 / total.value();
    for (auto& e : entries) e.weight *= scale;
    return BecEnsemble(std::move(entries), n_atoms, delta_omega);
}

// Normalised density of branch couplings in the irreversible limit.
class ContinuumDensity {
public:
    enum class Kind { Gaussian, TruncatedExponential };

    static ContinuumDensity gaussian(double kappa) {
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw InvalidArgument("gaussian_density: kappa must be positive and finite");
        ContinuumDensity d;
        d.kind_ = Kind::Gaussian;
        d.kappa_ = kappa;
        d.norm_ = 1.0 / std::sqrt(2.0 * std::numbers::pi * kappa * kappa);
        return d;
    }

    // Supported on -w0/4 <= eps <= 0 (0 <= w <= w0), proportional to exp(-alpha w(eps)).
    static ContinuumDensity truncated_exponential(double alpha, double omega0) {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw InvalidArgument("truncated exponential density: alpha must be positive");
        if (!(omega0 > 0.0)) throw InvalidArgument("truncated exponential density: omega0 must be positive");
        ContinuumDensity d;
        d.kind_ = Kind::TruncatedExponential;
        d.alpha_ = alpha;
        d.omega0_ = omega0;
        // Normalise in the frequency variable: d eps = w / (2 w0) dw.
        const auto unnormalised = [alpha, omega0](double w) {
            return std::exp(-alpha * w) * w / (2.0 * omega0);
        };
        const auto mass = integrate_adaptive(unnormalised, 0.0, omega0, 8, 1e-12, 1e-14, 10000);
        if (!mass.converged)
            throw ToleranceNotMet("truncated exponential density: normalisation did not converge",
                                  mass.est_error);
        d.norm_ = 1.0 / mass.value;
        return d;
    }

    Kind kind() const noexcept { return kind_; }
    double kappa() const noexcept { return kappa_; }
    double alpha() const noexcept { return alpha_; }
    double omega0() const noexcept { return omega0_; }

    double lower() const noexcept {
        return kind_ == Kind::Gaussian ? -std::numeric_limits<double>::infinity() : -0.25 * omega0_;
    }
    double upper() const noexcept {
        return kind_ == Kind::Gaussian ? std::numeric_limits<double>::infinity() : 0.0;
    }

    // P(eps)
    double operator()(double epsilon) const {
        if (kind_ == Kind::Gaussian)
            return norm_ * std::exp(-epsilon * epsilon / (2.0 * kappa_ * kappa_));
        if (epsilon < lower() || epsilon > upper()) return 0.0;
        return norm_ * std::exp(-alpha_ * branch_frequency(epsilon, omega0_));
    }

    // Density of branch frequencies on [0, w0]; TruncatedExponential only.
    double frequency_density(double omega) const {
        if (kind_ != Kind::TruncatedExponential)
            throw InvalidArgument("frequency_density: only defined for the truncated exponential");
        if (omega < 0.0 || omega > omega0_) return 0.0;
        return norm_ * std::exp(-alpha_ * omega) * omega / (2.0 * omega0_);
    }

private:
    ContinuumDensity() = default;

    Kind kind_ = Kind::Gaussian;
    double kappa_ = 0.0;
    double alpha_ = 0.0;
    double omega0_ = 0.0;
    double norm_ = 0.0;
};

inline ContinuumDensity gaussian_density(double kappa) { return ContinuumDensity::gaussian(kappa); }

// Probability mass of repeller branches, eps < -w0/4, under a Gaussian density.
inline double breakup_mass(const ContinuumDensity& density, double omega0) {
    if (density.kind() != ContinuumDensity::Kind::Gaussian)
        throw InvalidArgument("breakup_mass: density must be Gaussian");
    if (!(omega0 > 0.0)) throw InvalidArgument("breakup_mass: omega0 must be positive");
    return numerics::normal_cdf(-omega0 / (4.0 * density.kappa()));
}

}  // namespace becmon
