#pragma once

// Irreversible-limit dynamics under X^2 coupling. With eps ~ N(0, kappa^2)
// and z = 4 eps / w0 ~ N(0, sigma^2), sigma = 4 kappa / w0, every branch sum
// becomes an integral of the family
//
//   f_beta(tau; sigma) = (2 pi sigma^2)^(-1/2) int_{-1}^{inf} dz
//                        exp(-z^2 / 2 sigma^2) exp(i tau sqrt(1+z)) (1+z)^(-beta/2).
//
// Substituting w = sqrt(1+z) gives the bounded integrand
//   (2 pi sigma^2)^(-1/2) 2 w^(1-beta) exp(-(w^2-1)^2 / 2 sigma^2) exp(i tau w),
// which is integrated by adaptive Gauss-Kronrod on panels no wider than the
// oscillation period allows.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "becmon/core.hpp"
#include "becmon/dynamics_discrete.hpp"
#include "becmon/errors.hpp"
#include "becmon/numerics.hpp"
#include "becmon/quadrature.hpp"

namespace becmon {

using Complex = std::complex<double>;

// Integration stops where (w^2 - 1)^2 / (2 sigma^2) exceeds this (weight < 1e-26).
inline constexpr double kGaussianExponentCutoff = 60.0;

struct FBetaResult {
    Complex value;
    double est_error = 0.0;
    int beta = 0;
    double tau = 0.0;
    double sigma = 0.0;
    int subdivisions = 0;
};

namespace detail {

inline void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidArgument("sigma must be positive and finite");
}

// Upper bound on the Gaussian mass dropped by the w-range truncation,
// including the (1+z)^(1/2) growth of beta = -1 and the (1+z)^(-1/2)
// endpoint factor of beta = +1.
inline double truncation_bound(double sigma) {
    const double a = std::sqrt(2.0 * kGaussianExponentCutoff);
    return numerics::normal_cdf(-a) + (sigma + 2.0 / sigma) * numerics::normal_pdf(a);
}

}  // namespace detail

// Kernel integral with weight (1+z)^(-beta/2) for beta in [-2, 2]. beta = 2
// is singular at w = 0 and is cut off at w = kMinRelativeFrequency, the same
// guard applied to discrete branches.
inline FBetaResult kernel_integral(int beta, double tau, double sigma,
                                   const QuadratureSpec& spec = {}) {
    if (beta < -2 || beta > 2) throw InvalidArgument("kernel_integral: beta must lie in [-2, 2]");
    detail::check_sigma(sigma);
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw InvalidArgument("kernel_integral: tau must be finite and >= 0");
    spec.validate();

    const double spread = sigma * std::sqrt(2.0 * kGaussianExponentCutoff);
    double w_lo = std::sqrt(std::max(0.0, 1.0 - spread));
    if (beta == 2) w_lo = std::max(w_lo, kMinRelativeFrequency);
    const double w_hi = std::sqrt(1.0 + spread);

    const double norm = 2.0 / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    const int power = 1 - beta;
    auto integrand = [=](double w) {
        const double u = w * w - 1.0;
        double amplitude = norm * std::exp(-u * u * inv_two_var);
        switch (power) {
            case -1: amplitude /= w; break;
            case 1: amplitude *= w; break;
            case 2: amplitude *= w * w; break;
            case 3: amplitude *= w * w * w; break;
            default: break;
        }
        return Complex(amplitude * std::cos(tau * w), amplitude * std::sin(tau * w));
    };

    // Average node spacing width/15 must not exceed one period / resolution.
    const double max_panel =
        tau > 0.0 ? 15.0 * 2.0 * std::numbers::pi / (spec.oscillation_resolution * tau)
                  : (w_hi - w_lo);
    const int panels =
        std::max(8, static_cast<int>(std::ceil((w_hi - w_lo) / max_panel)));
    if (panels > spec.max_subdivisions)
        throw ToleranceNotMet("kernel_integral: tau=" + std::to_string(tau) + " needs " +
                                  std::to_string(panels) +
                                  " panels to resolve the phase, above max_subdivisions",
                              std::numeric_limits<double>::infinity());

    const auto quad = integrate_adaptive(integrand, w_lo, w_hi, panels, spec.abs_tol, spec.rel_tol,
                                         spec.max_subdivisions);
    FBetaResult result{quad.value, quad.est_error + detail::truncation_bound(sigma), beta, tau, sigma,
                       quad.subdivisions};
    if (!quad.converged)
        throw ToleranceNotMet("kernel_integral: beta=" + std::to_string(beta) +
                                  " tau=" + std::to_string(tau) + " sigma=" + std::to_string(sigma) +
                                  " exhausted max_subdivisions with error estimate " +
                                  std::to_string(quad.est_error),
                              result.est_error);
    return result;
}

inline FBetaResult f_beta(int beta, double tau, double sigma, const QuadratureSpec& spec = {}) {
    if (beta < -1 || beta > 1) throw InvalidArgument("f_beta: beta must be -1, 0 or +1");
    return kernel_integral(beta, tau, sigma, spec);
}

// Small-sigma approximation, identical for every beta:
//   (1 + i tau sigma^2/4)^(-1/2) exp(-tau^2 sigma^2 / (8 + 2 i sigma^2 tau)) exp(i tau).
inline Complex f_beta_gaussian_approx(double tau, double sigma) {
    detail::check_sigma(sigma);
    const double s2 = sigma * sigma;
    const Complex prefactor = 1.0 / std::sqrt(Complex(1.0, tau * s2 / 4.0));
    const Complex exponent = -(tau * tau * s2) / Complex(8.0, 2.0 * s2 * tau);
    return prefactor * std::exp(exponent) * std::exp(Complex(0.0, tau));
}

// sigma = 4 kappa / w0
inline double sigma_from_kappa(double kappa, const PhysicalParams& params = {}) {
    return 4.0 * kappa / params.omega0();
}

enum class ContinuumBackend {
    Quadrature,
    GaussianApprox,
};

namespace detail {

// Evaluates the kernel family through either backend, tracking the worst
// quadrature error estimate seen.
class KernelSource {
public:
    KernelSource(double sigma, ContinuumBackend backend, const QuadratureSpec& spec)
        : sigma_(sigma), backend_(backend), spec_(spec) {
        check_sigma(sigma);
    }

    Complex operator()(int beta, double tau) {
        if (backend_ == ContinuumBackend::GaussianApprox)
            return tau == 0.0 ? Complex(1.0, 0.0) : f_beta_gaussian_approx(tau, sigma_);
        const auto r = kernel_integral(beta, tau, sigma_, spec_);
        max_error_ = std::max(max_error_, r.est_error);
        return r.value;
    }

    double max_error() const noexcept { return max_error_; }

private:
    double sigma_;
    ContinuumBackend backend_;
    QuadratureSpec spec_;
    double max_error_ = 0.0;
};

}  // namespace detail

struct ContinuumMeans {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double est_error = 0.0;  // worst kernel error estimate (0 for the approximation)
};

//   <X> = <X(0)> Re f_0 + <P(0)>/(m w0) Im f_1
//   <P> = <P(0)> Re f_0 - m w0 <X(0)> Im f_-1
inline ContinuumMeans continuum_means(double tau, double sigma, const OscillatorMoments& init,
                                      const PhysicalParams& params = {},
                                      ContinuumBackend backend = ContinuumBackend::Quadrature,
                                      const QuadratureSpec& spec = {}) {
    detail::KernelSource kernel(sigma, backend, spec);
    const double mw0 = params.mass() * params.omega0();
    const Complex f0 = kernel(0, tau);
    const Complex f_plus = init.mean_p != 0.0 ? kernel(1, tau) : Complex{};
    const Complex f_minus = init.mean_x != 0.0 ? kernel(-1, tau) : Complex{};
    return ContinuumMeans{
        .mean_x = init.mean_x * f0.real() + init.mean_p / mw0 * f_plus.imag(),
        .mean_p = init.mean_p * f0.real() - mw0 * init.mean_x * f_minus.imag(),
        .est_error = kernel.max_error(),
    };
}

struct ContinuumSecondMoments {
    double mean_x2 = 0.0;
    double mean_p2 = 0.0;
    double mean_xp_sym = 0.0;
    double est_error = 0.0;
};

// Continuum limit of the per-branch second-moment expressions. With
// phi = 2 w tau and K_beta the kernel integrals above:
//   <X^2>   = C/(2 m w0) Im K_1(2tau) + P2/(2 m^2 w0^2) [K_2(0) - Re K_2(2tau)]
//             + X2/2 [K_0(0) + Re K_0(2tau)]
//   <P^2>   = -m w0 C/2 Im K_-1(2tau) + P2/2 [K_0(0) + Re K_0(2tau)]
//             + m^2 w0^2 X2/2 [K_-2(0) - Re K_-2(2tau)]
//   <XP+PX> = C Re K_0(2tau) + P2/(m w0) Im K_1(2tau) - m w0 X2 Im K_-1(2tau)
// where X2, P2, C are the initial <X^2>, <P^2>, <XP+PX>.
inline ContinuumSecondMoments continuum_second_moments(
    double tau, double sigma, const OscillatorMoments& init, const PhysicalParams& params = {},
    ContinuumBackend backend = ContinuumBackend::Quadrature, const QuadratureSpec& spec = {}) {
    detail::KernelSource kernel(sigma, backend, spec);
    const double mw0 = params.mass() * params.omega0();
    const double x2 = init.mean_x2;
    const double p2 = init.mean_p2;
    const double c = init.mean_xp_sym;
    const double two_tau = 2.0 * tau;

    const Complex k0 = kernel(0, two_tau);
    const Complex k1 = kernel(1, two_tau);
    const Complex km1 = kernel(-1, two_tau);
    const Complex k2 = kernel(2, two_tau);
    const Complex km2 = kernel(-2, two_tau);
    const double k0_0 = kernel(0, 0.0).real();
    const double k2_0 = kernel(2, 0.0).real();
    const double km2_0 = kernel(-2, 0.0).real();

    return ContinuumSecondMoments{
        .mean_x2 = c / (2.0 * mw0) * k1.imag() + p2 / (2.0 * mw0 * mw0) * (k2_0 - k2.real()) +
                   0.5 * x2 * (k0_0 + k0.real()),
        .mean_p2 = -0.5 * mw0 * c * km1.imag() + 0.5 * p2 * (k0_0 + k0.real()) +
                   0.5 * mw0 * mw0 * x2 * (km2_0 - km2.real()),
        .mean_xp_sym = c * k0.real() + p2 / mw0 * k1.imag() - mw0 * x2 * km1.imag(),
        .est_error = kernel.max_error(),
    };
}

struct ContinuumMoments {
    OscillatorMoments moments;
    double est_error = 0.0;
};

inline ContinuumMoments continuum_moments(double tau, double sigma, const OscillatorMoments& init,
                                          const PhysicalParams& params = {},
                                          ContinuumBackend backend = ContinuumBackend::Quadrature,
                                          const QuadratureSpec& spec = {}) {
    const auto means = continuum_means(tau, sigma, init, params, backend, spec);
    const auto second = continuum_second_moments(tau, sigma, init, params, backend, spec);
    return ContinuumMoments{
        OscillatorMoments{means.mean_x, means.mean_p, second.mean_x2, second.mean_p2,
                          second.mean_xp_sym},
        std::max(means.est_error, second.est_error),
    };
}

// Mean position under the truncated-exponential meter for <X(0)> = 0, with
// alpha and t in physical time units:
//   <X(t)> = <P(0)> (alpha sin(w0 t) + t cos(w0 t)) / (m (alpha w0 + 1)(1 + t^2/alpha^2)).
inline double power_law_mean_x(double t, double alpha, const OscillatorMoments& init,
                               const PhysicalParams& params = {}) {
    if (!(alpha > 0.0)) throw InvalidArgument("power_law_mean_x: alpha must be positive");
    if (init.mean_x != 0.0)
        throw InvalidArgument("power_law_mean_x: only defined for <X(0)> = 0");
    const double w0 = params.omega0();
    const double phase = w0 * t;
    const double numerator = alpha * std::sin(phase) + t * std::cos(phase);
    const double denominator = params.mass() * (alpha * w0 + 1.0) * (1.0 + t * t / (alpha * alpha));
    return init.mean_p * numerator / denominator;
}

// m d<X>/dt of the power-law mean position. Ehrenfest's d<X>/dt = <P>/m holds
// branch by branch, hence also for the mixture.
inline double power_law_mean_p(double t, double alpha, const OscillatorMoments& init,
                               const PhysicalParams& params = {}) {
    if (!(alpha > 0.0)) throw InvalidArgument("power_law_mean_p: alpha must be positive");
    if (init.mean_x != 0.0)
        throw InvalidArgument("power_law_mean_p: only defined for <X(0)> = 0");
    const double w0 = params.omega0();
    const double s = std::sin(w0 * t);
    const double c = std::cos(w0 * t);
    const double g = alpha * s + t * c;
    const double dg = alpha * w0 * c + c - t * w0 * s;
    const double h = 1.0 + t * t / (alpha * alpha);
    const double dh = 2.0 * t / (alpha * alpha);
    return init.mean_p / (alpha * w0 + 1.0) * (dg * h - g * dh) / (h * h);
}

// Amplitude of the power-law oscillation at time t: max over phase of
// |alpha sin + t cos| = sqrt(alpha^2 + t^2).
inline double power_law_envelope(double t, double alpha, const OscillatorMoments& init,
                                 const PhysicalParams& params = {}) {
    const double w0 = params.omega0();
    return std::abs(init.mean_p) * std::hypot(alpha, t) /
           (params.mass() * (alpha * w0 + 1.0) * (1.0 + t * t / (alpha * alpha)));
}

}  // namespace becmon
