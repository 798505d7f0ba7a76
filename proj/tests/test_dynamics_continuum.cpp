#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "becmon/dynamics_continuum.hpp"
#include "becmon/ensemble.hpp"
#include "becmon/numerics.hpp"
#include "oracles.hpp"

using namespace becmon;

namespace {

constexpr double kDecoherenceSigma = 4.0 * 0.0024 * 10.0;  // 4 kappa / w0 with N = 100, dOmega = 0.0024

OscillatorMoments kicked_coherent(const PhysicalParams& p = {}) {
    return coherent_state_moments(p, 0.0, 2.0 * p.momentum_unit());
}

}  // namespace

TEST(FBeta, TimeZeroIsNormalCdf) {
    for (double sigma : {0.05, 0.096, 0.3, 0.8, 2.0}) {
        const auto r = f_beta(0, 0.0, sigma);
        EXPECT_NEAR(r.value.real(), numerics::normal_cdf(1.0 / sigma), 1e-10) << sigma;
        EXPECT_EQ(r.value.imag(), 0.0);
        EXPECT_GE(r.est_error, 0.0);
    }
    EXPECT_NEAR(f_beta(0, 0.0, kDecoherenceSigma).value.real(), 1.0, 1e-15);
}

TEST(FBeta, TimeZeroRealPositive) {
    for (int beta : {-1, 0, 1})
        for (double sigma : {0.01, 0.1, 0.4, 1.0}) {
            const auto r = f_beta(beta, 0.0, sigma);
            EXPECT_EQ(r.value.imag(), 0.0);
            EXPECT_GT(r.value.real(), 0.0);
            if (beta <= 0) {
                EXPECT_LE(r.value.real(), 1.0 + r.est_error) << beta << " " << sigma;
            }
        }
}

// E[(1+z)^(-1/2)] = 1 + 3 sigma^2/8 + O(sigma^4) > 1 by convexity, so the
// beta = +1 kernel at tau = 0 exceeds unity.
TEST(FBeta, PlusOneKernelExceedsUnityAtTimeZero) {
    for (double sigma : {0.01, 0.05, 0.1}) {
        const double v = f_beta(1, 0.0, sigma).value.real();
        EXPECT_GT(v, 1.0);
        EXPECT_NEAR(v - 1.0, 3.0 * sigma * sigma / 8.0, 2.0 * sigma * sigma * sigma * sigma + 1e-10);
    }
}

TEST(FBeta, ModulusBoundedByTimeZeroValue) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> tau_dist(0.0, 300.0);
    for (double sigma : {0.05, 0.2}) {
        const auto peak = f_beta(0, 0.0, sigma);
        for (int i = 0; i < 30; ++i) {
            const auto r = f_beta(0, tau_dist(rng), sigma);
            EXPECT_LE(std::abs(r.value), peak.value.real() + r.est_error + peak.est_error);
        }
    }
}

TEST(FBeta, AgreesWithMonteCarlo) {
    const auto mc = oracle::monte_carlo_f_beta(0, 10.0, kDecoherenceSigma, 2'000'000, 42);
    const auto r = f_beta(0, 10.0, kDecoherenceSigma);
    EXPECT_LE(std::abs(r.value.real() - mc.mean.real()), 3.0 * mc.se_real);
    EXPECT_LE(std::abs(r.value.imag() - mc.mean.imag()), 3.0 * mc.se_imag);
}

TEST(FBeta, BetaDependenceIsOrderSigma) {
    const double sigma = 0.1;
    double worst = 0.0;
    for (double tau = 0.0; tau <= 1.0 / (sigma * sigma); tau += 2.5) {
        const auto plus = f_beta(1, tau, sigma).value;
        const auto minus = f_beta(-1, tau, sigma).value;
        worst = std::max(worst, std::abs(plus - minus));
    }
    EXPECT_LT(worst, 2.0 * sigma);
    EXPECT_GT(worst, 0.05 * sigma);
}

TEST(FBeta, GaussianEnvelope) {
    const double sigma = kDecoherenceSigma;
    const auto r = f_beta(0, 3.0 / sigma, sigma);
    EXPECT_LE(std::abs(r.value), std::exp(-9.0 / 8.0) + 0.05);
}

TEST(FBeta, ArgumentChecks) {
    EXPECT_THROW(f_beta(2, 1.0, 0.1), InvalidArgument);
    EXPECT_THROW(f_beta(0, 1.0, 0.0), InvalidArgument);
    EXPECT_THROW(f_beta(0, -1.0, 0.1), InvalidArgument);
}

TEST(FBeta, ToleranceNotMetWhenBudgetTooSmall) {
    QuadratureSpec spec;
    spec.max_subdivisions = 9;
    spec.abs_tol = 1e-15;
    spec.rel_tol = 1e-15;
    EXPECT_THROW(f_beta(0, 5.0, 0.3, spec), ToleranceNotMet);
    spec.max_subdivisions = 4;
    EXPECT_THROW(f_beta(0, 500.0, 0.3, spec), ToleranceNotMet);
}

TEST(GaussianApprox, UnityAtTimeZero) {
    const auto v = f_beta_gaussian_approx(0.0, 0.3);
    EXPECT_EQ(v, Complex(1.0, 0.0));
}

TEST(GaussianApprox, ModulusAtInverseSigma) {
    // |f(1/sigma)| = |1 + i sigma/4|^(-1/2) |exp(-1/(8 + 2 i sigma))| -> exp(-1/8).
    const double sigma = 0.01;
    EXPECT_NEAR(std::abs(f_beta_gaussian_approx(1.0 / sigma, sigma)), std::exp(-0.125), 1e-5);
}

TEST(GaussianApprox, WithinOrderSigmaOfQuadrature) {
    const double sigma = kDecoherenceSigma;
    const double tau = 2.0 * std::numbers::pi;
    const auto exact = f_beta(0, tau, sigma).value;
    const auto approx = f_beta_gaussian_approx(tau, sigma);
    const double rel = std::abs(exact - approx) / std::abs(exact);
    // Measured ~2e-3, far inside the O(sigma) allowance.
    EXPECT_LT(rel, 3.0 * sigma);
}

TEST(ContinuumMeans, TimeZero) {
    const PhysicalParams p;
    const auto init = coherent_state_moments(p, 0.3, -0.7);
    for (double sigma : {0.096, 0.5}) {
        const auto m = continuum_means(0.0, sigma, init, p);
        const double phi = numerics::normal_cdf(1.0 / sigma);
        EXPECT_NEAR(m.mean_x, 0.3 * phi, 1e-10);
        EXPECT_NEAR(m.mean_p, -0.7 * phi, 1e-10);
    }
}

TEST(ContinuumMeans, ApproxBackendIsBetaIndependent) {
    const PhysicalParams p(2.0, 0.5);
    const auto init = coherent_state_moments(p, 0.4, 0.9);
    const double tau = 7.0;
    const double sigma = 0.1;
    const auto f = f_beta_gaussian_approx(tau, sigma);
    const auto m = continuum_means(tau, sigma, init, p, ContinuumBackend::GaussianApprox);
    const double mw0 = p.mass() * p.omega0();
    EXPECT_NEAR(m.mean_x, 0.4 * f.real() + 0.9 / mw0 * f.imag(), 1e-15);
    EXPECT_NEAR(m.mean_p, 0.9 * f.real() - mw0 * 0.4 * f.imag(), 1e-15);
    EXPECT_EQ(m.est_error, 0.0);
}

TEST(ContinuumMeans, MatchDiscreteAtDecoherencePreset) {
    const PhysicalParams p;
    const auto init = kicked_coherent(p);
    const auto ens = binomial_ensemble(100, 0.0024);
    const double amplitude = 2.0;
    for (double tau : {1.0, 5.0, 10.0, 20.0}) {
        const auto d = ensemble_average(ens, CouplingKind::PositionSquared, tau, init, p);
        const auto c = continuum_means(tau, kDecoherenceSigma, init, p);
        EXPECT_LE(std::abs(d.mean_x - c.mean_x) / p.length_unit(), 1e-3 * amplitude) << tau;
        EXPECT_LE(std::abs(d.mean_p - c.mean_p) / p.momentum_unit(), 1e-3 * amplitude) << tau;
    }
}

// At fixed kappa the discrete sums converge to the continuum integrals.
TEST(ContinuumMeans, DiscreteConvergesWithN) {
    const PhysicalParams p;
    const auto init = coherent_state_moments(p, 0.5 * p.length_unit(), 2.0 * p.momentum_unit());
    const double kappa = 0.024;
    const double sigma = sigma_from_kappa(kappa, p);
    double previous = 1e300;
    for (long n_atoms : {100L, 1000L, 10000L}) {
        // The far tail at N = 1e4 reaches repeller branches with ~1e-27 weight.
        const auto ens = drop_breakup_branches(
            binomial_ensemble(n_atoms, kappa / std::sqrt(static_cast<double>(n_atoms))), p, 1e-20);
        double worst = 0.0;
        for (double tau = 0.0; tau <= 60.0; tau += 2.0) {
            const auto d = ensemble_average(ens, CouplingKind::PositionSquared, tau, init, p);
            const auto c = continuum_means(tau, sigma, init, p);
            worst = std::max({worst, std::abs(d.mean_x - c.mean_x), std::abs(d.mean_p - c.mean_p)});
        }
        EXPECT_LT(worst, previous / 5.0) << n_atoms;
        previous = worst;
    }
}

TEST(ContinuumSecondMoments, TimeZeroReproducesInitialState) {
    const PhysicalParams p(1.3, 0.7);
    const OscillatorMoments init{0.2, -0.4, 0.9, 1.4, 0.3};
    const auto s = continuum_second_moments(0.0, 0.096, init, p);
    EXPECT_NEAR(s.mean_x2, init.mean_x2, 1e-9);
    EXPECT_NEAR(s.mean_p2, init.mean_p2, 1e-9);
    EXPECT_NEAR(s.mean_xp_sym, init.mean_xp_sym, 1e-9);
}

TEST(ContinuumSecondMoments, MatchDiscreteAtDecoherencePreset) {
    const PhysicalParams p;
    const auto init = kicked_coherent(p);
    const auto ens = binomial_ensemble(100, 0.0024);
    // The second moments oscillate at 2w, so finite-N corrections show up at
    // half the time they do in the means; by tau = 20 the <XP+PX> gap is ~1e-3
    // of its Cauchy-Schwarz scale.
    for (double tau : {1.0, 5.0, 10.0, 20.0}) {
        const double tol = tau <= 10.0 ? 1e-3 : 2e-3;
        const auto d = ensemble_average(ens, CouplingKind::PositionSquared, tau, init, p);
        const auto c = continuum_second_moments(tau, kDecoherenceSigma, init, p);
        EXPECT_NEAR(c.mean_x2, d.mean_x2, tol * std::abs(d.mean_x2)) << tau;
        EXPECT_NEAR(c.mean_p2, d.mean_p2, tol * std::abs(d.mean_p2)) << tau;
        const double xp_scale = 2.0 * std::sqrt(d.mean_x2 * d.mean_p2);
        EXPECT_NEAR(c.mean_xp_sym, d.mean_xp_sym, tol * xp_scale) << tau;
    }
}

TEST(ContinuumSecondMoments, KineticAndPotentialEqualiseLate) {
    const PhysicalParams p;
    const auto init = kicked_coherent(p);
    const double sigma = kDecoherenceSigma;
    double kinetic = 0.0, potential = 0.0;
    int count = 0;
    for (double tau = 5.0 / sigma; tau <= 10.0 / sigma; tau += 0.25, ++count) {
        const auto s = continuum_second_moments(tau, sigma, init, p);
        kinetic += s.mean_p2 / (2.0 * p.mass());
        potential += 0.5 * p.mass() * p.omega0() * p.omega0() * s.mean_x2;
    }
    kinetic /= count;
    potential /= count;
    EXPECT_NEAR(kinetic / potential, 1.0, 1e-2);
    // Both settle at half of the initial total energy (kinetic plus zero-point potential).
    const double total = init.mean_p2 / (2.0 * p.mass()) + 0.5 * p.mass() * init.mean_x2;
    EXPECT_NEAR(kinetic, 0.5 * total, 1e-2 * total);
    EXPECT_NEAR(potential, 0.5 * total, 1e-2 * total);
}

TEST(PowerLaw, VanishesAtTimeZero) {
    const auto init = kicked_coherent();
    EXPECT_EQ(power_law_mean_x(0.0, 5.0, init), 0.0);
}

TEST(PowerLaw, MomentumIsMassTimesVelocity) {
    const PhysicalParams p(1.4, 2.2);
    const auto init = kicked_coherent(p);
    for (double t : {0.0, 0.3, 4.0, 37.0}) {
        const double h = 1e-5;
        const double fd = (power_law_mean_x(t + h, 3.0, init, p) - power_law_mean_x(t - h, 3.0, init, p)) / (2 * h);
        EXPECT_NEAR(power_law_mean_p(t, 3.0, init, p), p.mass() * fd, 1e-8);
    }
}

TEST(PowerLaw, EnvelopeSlopeMinusOne) {
    const double alpha = 5.0;
    const auto init = kicked_coherent();
    const double t1 = 10.0 * alpha, t2 = 100.0 * alpha;
    const double slope = std::log(power_law_envelope(t2, alpha, init) / power_law_envelope(t1, alpha, init)) /
                         std::log(t2 / t1);
    EXPECT_NEAR(slope, -1.0, 0.05);
    // The sampled values never exceed the envelope.
    for (double t = 0.0; t < t2; t += 0.37)
        EXPECT_LE(std::abs(power_law_mean_x(t, alpha, init)), power_law_envelope(t, alpha, init) * (1 + 1e-12));
}

TEST(PowerLaw, RequiresCentredInitialState) {
    const auto init = coherent_state_moments(PhysicalParams{}, 0.1, 1.0);
    EXPECT_THROW(power_law_mean_x(1.0, 2.0, init), InvalidArgument);
    EXPECT_THROW(power_law_mean_x(1.0, 0.0, kicked_coherent()), InvalidArgument);
}
