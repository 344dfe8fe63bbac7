#include <gtest/gtest.h>

#include <numbers>

#include "kolmo/core/random.hpp"
#include "kolmo/inequality/interpolation.hpp"
#include "kolmo/inequality/spectral.hpp"

using namespace kolmo;

namespace {

// Golden-section search of eps^{-k} a + eps b in log eps; returns the minimum value.
double golden_min(double a, double b, double k) {
    auto f = [&](double u) { return std::exp(-k * u) * a + std::exp(u) * b; };
    double lo = -60.0, hi = 60.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > 1e-12) {
        if (f1 < f2) {
            hi = x2, x2 = x1, f2 = f1, x1 = hi - phi * (hi - lo), f1 = f(x1);
        } else {
            lo = x1, x1 = x2, f1 = f2, x2 = lo + phi * (hi - lo), f2 = f(x2);
        }
    }
    return f(0.5 * (lo + hi));
}

PhaseGrid pi_box(std::size_t M) { return PhaseGrid(1, M, std::numbers::pi); }

const ThickSetDescriptor balls = PeriodicBalls{{1.0, 1.0}, {{0.0, 0.0}}, 0.3};

GaussianMixtureState random_state(Rng& rng, int terms = 2) {
    RandomMixtureSpec spec;
    spec.terms = terms;
    return random_mixture(1, spec, rng);
}

} // namespace

TEST(EpsilonMinimize, ClosedFormExamples) {
    auto r = epsilon_minimize(1.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(r.eps_star, 1.0);
    EXPECT_DOUBLE_EQ(r.min_value, 2.0);
    r = epsilon_minimize(1.0, 4.0, 1.0);
    EXPECT_DOUBLE_EQ(r.eps_star, 0.5);
    EXPECT_DOUBLE_EQ(r.min_value, 4.0);
    EXPECT_NEAR(golden_min(1.0, 4.0, 1.0), 4.0, 4e-9);
    const auto z = epsilon_minimize(0.0, 3.0, 2.0);
    EXPECT_TRUE(z.boundary);
    EXPECT_EQ(z.min_value, 0.0);
    EXPECT_THROW(epsilon_minimize(1.0, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(epsilon_minimize(-1.0, 1.0, 1.0), InvalidArgument);
    EXPECT_EQ(ConstantLedger::make(1.0, DecayConstants::defaults(1), 0.5, 1.0).k_alpha, 1.0);
}

TEST(EpsilonMinimize, MatchesGoldenSectionSearch) {
    Rng rng(31);
    for (int i = 0; i < 10000; ++i) {
        const double a = std::exp(uniform(rng, -5, 5)), b = std::exp(uniform(rng, -5, 5)), k = std::exp(uniform(rng, -2, 2));
        const auto r = epsilon_minimize(a, b, k);
        ASSERT_NEAR(r.min_value / golden_min(a, b, k), 1.0, 1e-9) << a << " " << b << " " << k;
        // eps_star is stationary: value there equals the minimum
        ASSERT_NEAR(std::pow(r.eps_star, -k) * a + r.eps_star * b, r.min_value, 1e-12 * r.min_value);
    }
}

TEST(EpsilonMinimize, ExponentsAreOneMinusAlphaAndAlpha) {
    Rng rng(32);
    for (int i = 0; i < 10000; ++i) {
        const double alpha = uniform(rng, 0.01, 0.99);
        const double k = alpha / (1.0 - alpha);
        const double a = std::exp(uniform(rng, -5, 5)), b = std::exp(uniform(rng, -5, 5));
        const double expect = std::pow(a, 1 - alpha) * std::pow(b, alpha) * std::pow(alpha, -alpha) *
                              std::pow(1 - alpha, alpha - 1);
        ASSERT_NEAR(epsilon_minimize(a, b, k).min_value / expect, 1.0, 1e-12);
    }
}

TEST(ConstantLedger, ExampleAgainstIndependentArithmetic) {
    DecayConstants k = DecayConstants::defaults(1);
    k.C2 = 1.0, k.c_exponent = 2.0, k.c_pointwise = 1.0, k.C3 = 1.0;
    const auto L = ConstantLedger::make(1.0, k, 0.5, 1.0);
    EXPECT_NEAR(L.log_C_tilde1, std::max(1.5, std::log(2.0) + 2.5), 1e-15);
    EXPECT_NEAR(L.log_envelope(), std::log(2.0) + 36.0, 1e-13);
    EXPECT_LE(L.log_C_tilde1, L.log_envelope());
    EXPECT_THROW(ConstantLedger::make(1.0, k, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(ConstantLedger::make(1.0, k, 0.5, 0.0), InvalidArgument);
}

TEST(ConstantLedger, YoungSplitHoldsOnRandomSamples) {
    Rng rng(33);
    long violations = 0;
    for (int i = 0; i < 100000; ++i) {
        auto k = DecayConstants::with_exponent(1, std::exp(uniform(rng, -4, 1)));
        const auto L = ConstantLedger::make(std::exp(uniform(rng, -3, 3)), k, uniform(rng, 0.01, 0.99),
                                            std::exp(uniform(rng, -3, 3)));
        const double N = std::exp(uniform(rng, -4, 4));
        const auto m = young_split(L, N);
        const double scale = 1.0 + L.C1 * N + L.C2 * L.T31 * N * N;
        if (m.first < -1e-12 * scale || m.second < -1e-12 * scale) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(ConstantLedger, DirectConstantBelowEnvelope) {
    Rng rng(34);
    for (int i = 0; i < 10000; ++i) {
        auto k = DecayConstants::with_exponent(1, std::exp(uniform(rng, -4, 1)));
        k.C3 = uniform(rng, 0.0, 5.0);
        const auto L = ConstantLedger::make(std::exp(uniform(rng, -3, 3)), k, uniform(rng, 0.01, 0.99),
                                            std::exp(uniform(rng, -3, 3)));
        ASSERT_LE(L.log_C_tilde1, L.log_envelope());
    }
}

TEST(SpectralRatio, FullSpaceIsPlancherelConstant) {
    Rng rng(35);
    const auto g = pi_box(64);
    for (double N : {1.0, 3.0, 7.5}) {
        const auto F = detail::random_band_limited(g, N, rng);
        EXPECT_NEAR(spectral_ratio(F, GridMask::ones(g), N), std::pow(two_pi, -2), 1e-12 * std::pow(two_pi, -2));
    }
}

TEST(SpectralRatio, MonotoneInTheSet) {
    Rng rng(36);
    const auto g = pi_box(64);
    const auto small = grid_mask(PeriodicBalls{{1.0, 1.0}, {{0.0, 0.0}}, 0.25}, g);
    const auto large = grid_mask(PeriodicBalls{{1.0, 1.0}, {{0.0, 0.0}}, 0.4}, g);
    for (int i = 0; i < 20; ++i) {
        const double N = uniform(rng, 0.5, 8.0);
        const auto F = detail::random_band_limited(g, N, rng);
        EXPECT_LE(spectral_ratio(F, large, N), spectral_ratio(F, small, N));
    }
}

TEST(SpectralRatio, TruncatedGaussianMatchesDirectSummation) {
    const auto g = pi_box(32);
    const double N = 4.0;
    const auto F = band_project(sample_spectral(g, [](const auto& z) {
                                    return cdouble(std::exp(-0.25 * (z[0] * z[0] + z[1] * z[1])), 0.0);
                                }),
                                N);
    const auto mask = grid_mask(balls, g);
    // Oracle: inverse transform by explicit sums over the dual nodes.
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) lhs += std::norm(F[k]) * g.dual_cell_volume();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!mask.values[i]) continue;
        const auto z = g.point(i);
        cdouble s{0.0, 0.0};
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (F[k] == cdouble{0.0, 0.0}) continue;
            const auto w = g.dual_point(k);
            s += F[k] * std::polar(1.0, z[0] * w[0] + z[1] * w[1]) * g.dual_cell_volume();
        }
        rhs += std::norm(s) * g.cell_volume(); // the unnormalized inverse: no (2 pi)^{-2}
    }
    EXPECT_NEAR(spectral_ratio(F, mask, N) / (lhs / rhs), 1.0, 1e-10);
}

TEST(SpectralRatio, Errors) {
    const auto g = pi_box(16);
    Rng rng(37);
    const auto F = detail::random_band_limited(g, 3.0, rng);
    EXPECT_THROW(spectral_ratio(F, GridMask::ones(g), 1.0), InvalidArgument);
    GridMask empty{g, std::vector<std::uint8_t>(g.size(), 0)};
    EXPECT_THROW(spectral_ratio(F, empty, 3.0), InvalidArgument);
    // The zero field has no restricted norm to divide by.
    EXPECT_THROW(spectral_ratio(SpectralField(g), GridMask::ones(g), 3.0), ZeroRestrictedNorm);
}

TEST(SpectralFit, FullSpaceGivesTrivialConstant) {
    SpectralFitOptions opt;
    opt.random_samples = 4;
    const auto rep = fit_spectral_constant(FullSpace{}, pi_box(64), opt);
    EXPECT_EQ(rep.fitted_C, 0.0);
    for (const auto& row : rep.rows) EXPECT_NEAR(row.worst_ratio, std::pow(two_pi, -2), 1e-12);
    EXPECT_NEAR(rep.C1_norm, std::log(two_pi), 1e-15);
    EXPECT_TRUE(rep.warning.empty());
}

TEST(SpectralFit, HalfBoxIsFiniteAndAdversarialDominates) {
    const auto g = pi_box(64);
    SpectralFitOptions opt;
    opt.random_samples = 8;
    const auto rep = fit_spectral_constant(HalfSpace{{1.0, 0.0}, 0.0}, g, opt);
    EXPECT_FALSE(rep.warning.empty());
    EXPECT_TRUE(std::isfinite(rep.fitted_C));
    EXPECT_GT(rep.fitted_C, 0.0);
    for (const auto& row : rep.rows) EXPECT_GE(row.worst_adversarial, row.worst_random);
}

TEST(SpectralFit, NonDecreasingAsTheSetShrinks) {
    const auto g = pi_box(64);
    SpectralFitOptions opt;
    opt.random_samples = 4;
    opt.power_iterations = 200;
    double previous = -1.0;
    for (double rho : {0.45, 0.4, 0.35, 0.3, 0.25}) {
        const auto rep = fit_spectral_constant(PeriodicBalls{{1.0, 1.0}, {{0.0, 0.0}}, rho}, g, opt);
        EXPECT_GE(rep.fitted_C, previous) << "rho=" << rho;
        previous = rep.fitted_C;
    }
}

TEST(SpectralFit, ReproducibleUnderSeed) {
    const auto g = pi_box(32);
    SpectralFitOptions opt;
    opt.seed = 99;
    opt.random_samples = 3;
    const auto a = fit_spectral_constant(balls, g, opt), b = fit_spectral_constant(balls, g, opt);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].worst_ratio, b.rows[i].worst_ratio);
    opt.seed = 100;
    const auto c = fit_spectral_constant(balls, g, opt);
    EXPECT_NE(c.rows[0].worst_random, a.rows[0].worst_random);
}

TEST(RestrictedNorm, FullSamplerMatchesClosedForm) {
    Rng rng(38);
    const auto s = propagate_mixture(random_state(rng), 1.0);
    const RestrictedNormSampler sampler(FullSpace{}, covering_box({s}));
    EXPECT_NEAR(sampler.full(s) / mixture_physical_norm(s), 1.0, 1e-10);
    EXPECT_NEAR(sampler.restricted(s) / mixture_physical_norm(s), 1.0, 1e-10);
    const RestrictedNormSampler on_balls(balls, covering_box({s}));
    EXPECT_LT(on_balls.restricted(s), sampler.full(s));
    EXPECT_NEAR(on_balls.measure_fraction(), std::numbers::pi * 0.09, 0.01);
}

TEST(InterpolationBound, FullSpaceIsTriviallyConsistent) {
    const auto L = ConstantLedger::make(1.0, DecayConstants::defaults(1), 0.5, 1.0);
    const auto b = assemble_interpolation_bound(L, 2.0, 2.0);
    EXPECT_GE(b.bound(), 2.0);
    EXPECT_LE(b.product_form_mismatch, 1e-12);
    EXPECT_GE(std::exp(b.log_audit_bound), 2.0);
    EXPECT_THROW(assemble_interpolation_bound(L, 1.0, 0.0), InvalidArgument);
}

TEST(InterpolationBound, AuditMinimizerBeatsNeighbours) {
    Rng rng(39);
    for (int i = 0; i < 200; ++i) {
        const auto L = ConstantLedger::make(uniform(rng, 0.1, 5.0), DecayConstants::defaults(1), uniform(rng, 0.1, 0.9),
                                            uniform(rng, 0.1, 4.0));
        const double a = std::exp(uniform(rng, -8, 0)), b = 1.0;
        const auto r = assemble_interpolation_bound(L, a, b);
        for (double dN : {-1e-3, 1e-3, -0.1, 0.1, 1.0}) {
            if (r.audit_N + dN >= 0.0) {
                ASSERT_LE(r.log_audit_bound, log_split_bound(L, r.audit_N + dN, a, b) + 1e-12);
            }
        }
        ASSERT_LE(r.log_audit_bound, log_split_bound(L, 0.0, a, b) + 1e-12);
    }
}

TEST(VerifyInterpolation, FullSpaceObservedConstantIsNonPositive) {
    Rng rng(40);
    for (int i = 0; i < 3; ++i) {
        const auto g0 = random_state(rng);
        for (double T : {0.25, 1.0}) {
            const auto r = verify_interpolation(g0, FullSpace{}, T, 0.5, 1.0);
            EXPECT_LE(r.observed_constant, 0.0);
            EXPECT_LE(r.lhs, r.rhs());
        }
    }
}

TEST(VerifyInterpolation, BoundedAsAlphaApproachesOne) {
    Rng rng(41);
    const auto g0 = random_state(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {0.9, 0.99, 0.999}) {
        const auto r = verify_interpolation(g0, balls, 1.0, alpha, 2.0);
        EXPECT_TRUE(std::isfinite(r.observed_constant));
        EXPECT_LE(r.observed_constant, r.envelope_constant);
        // observed = alpha (1 - alpha) ln(||g(T)|| / ||g(T)||_omega) / shape + alpha ln(||g(T)|| / ||g0||) / shape
        EXPECT_LE(r.observed_constant, prev + 1e-12);
        prev = r.observed_constant;
    }
}

TEST(VerifyInterpolation, ProofChainHoldsWithFittedConstant) {
    SpectralFitOptions opt;
    opt.random_samples = 4;
    opt.N_list = {1.0, 2.0, 4.0};
    const auto fit = fit_spectral_constant(balls, pi_box(64), opt);
    Rng rng(42);
    const auto g0 = random_state(rng);
    for (double T : {0.25, 1.0}) {
        const auto r = verify_interpolation(g0, balls, T, 0.5, fit.C1_norm);
        EXPECT_LE(std::log(r.lhs), r.chain.log_bound);
        EXPECT_LE(std::log(r.lhs), r.chain.log_audit_bound);
        if (r.chain.eps.eps_star < 1.0) {
            EXPECT_LE(r.chain.log_audit_bound, r.chain.log_bound + 1e-12);
        }
        EXPECT_LE(r.observed_constant, r.envelope_constant);
        EXPECT_THROW(verify_interpolation(g0, balls, T, 1.0, fit.C1_norm), InvalidArgument);
    }
}
