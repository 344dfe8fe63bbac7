#include <gtest/gtest.h>

#include <filesystem>

#include "kolmo/core/gaussian_mixture.hpp"
#include "kolmo/core/norms.hpp"
#include "kolmo/core/snapshot.hpp"
#include "support.hpp"

using namespace kolmo;
using kolmo::testing::rel_l2;

namespace {

PhaseField standard_gaussian(const PhaseGrid& g) {
    return sample_phase(g, [](const auto& z) { return cdouble(std::exp(-0.5 * (z[0] * z[0] + z[1] * z[1])), 0.0); });
}

} // namespace

TEST(PhaseGrid, RejectsInvalidParameters) {
    EXPECT_THROW(PhaseGrid(1, 7, 1.0), InvalidArgument);
    EXPECT_THROW(PhaseGrid(1, 0, 1.0), InvalidArgument);
    EXPECT_THROW(PhaseGrid(1, 8, -1.0), InvalidArgument);
    EXPECT_THROW(PhaseGrid(3, 8, 1.0), InvalidArgument);
    const PhaseGrid g(1, 8, 2.0);
    EXPECT_EQ(g.size(), 64u);
    EXPECT_DOUBLE_EQ(g.dual_spacing(), std::numbers::pi / 2.0);
    EXPECT_EQ(g.signed_index(4), -4);
    EXPECT_EQ(g.signed_index(3), 3);
}

TEST(Fourier, ZeroFieldMapsToZero) {
    const PhaseGrid g(1, 16, 3.0);
    const auto F = fourier_forward(PhaseField(g));
    for (const auto& z : F.values()) EXPECT_EQ(z, cdouble(0.0, 0.0));
}

TEST(Fourier, StandardGaussianHasClosedFormTransform) {
    const PhaseGrid g(1, 64, 10.0);
    const auto F = fourier_forward(standard_gaussian(g));
    const auto expected = sample_spectral(g, [](const auto& z) {
        return cdouble(two_pi * std::exp(-0.5 * (z[0] * z[0] + z[1] * z[1])), 0.0);
    });
    EXPECT_LE(rel_l2(F.values(), expected.values()), 1e-8);
    // One node by direct summation of the quadrature sum, no FFT involved.
    const std::size_t node = 3 * 64 + 60;
    const auto zeta = g.dual_point(node);
    cdouble direct{0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto z = g.point(i);
        direct += std::exp(-0.5 * (z[0] * z[0] + z[1] * z[1])) *
                  std::polar(1.0, -(z[0] * zeta[0] + z[1] * zeta[1]));
    }
    direct *= g.cell_volume();
    EXPECT_LE(std::abs(direct - F[node]), 1e-12 * two_pi);
}

TEST(Fourier, PlancherelFactorIsTwoPiToTheD) {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const PhaseGrid g(1, 32, 1.0 + trial);
        const auto f = kolmo::testing::random_field(g, rng);
        const double ratio = l2_norm(fourier_forward(f)) / l2_norm(f);
        EXPECT_NEAR(ratio / two_pi, 1.0, 1e-10);
    }
    const PhaseGrid g2(2, 8, 2.0);
    const auto f2 = kolmo::testing::random_field(g2, rng);
    EXPECT_NEAR(l2_norm(fourier_forward(f2)) / l2_norm(f2) / (two_pi * two_pi), 1.0, 1e-10);
}

TEST(Fourier, RoundTripIsIdentity) {
    Rng rng(11);
    const std::size_t sizes[] = {64, 128, 256};
    for (int trial = 0; trial < 100; ++trial) {
        const PhaseGrid g(1, sizes[trial % 3], uniform(rng, 1.0, 20.0));
        const auto f = kolmo::testing::random_field(g, rng);
        EXPECT_LE(rel_l2(fourier_inverse(fourier_forward(f)).values(), f.values()), 1e-12);
    }
}

TEST(Fourier, SingleModeIsPlaneWave) {
    const PhaseGrid g(1, 16, 4.0);
    SpectralField F(g);
    const std::size_t node = 2 * 16 + 13; // signed indices (2, -3)
    F[node] = 1.0;
    const auto f = fourier_inverse(F);
    const auto zeta = g.dual_point(node);
    const double scale = g.dual_cell_volume() / (two_pi * two_pi);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto z = g.point(i);
        const cdouble expected = scale * std::polar(1.0, z[0] * zeta[0] + z[1] * zeta[1]);
        EXPECT_LE(std::abs(f[i] - expected), 1e-15);
    }
}

TEST(Fourier, ParsevalOnRandomPair) {
    Rng rng(3);
    const PhaseGrid g(1, 32, 5.0);
    const auto f = kolmo::testing::random_field(g, rng);
    const auto h = kolmo::testing::random_field(g, rng);
    const auto F = fourier_forward(f), H = fourier_forward(h);
    cdouble phys{0.0, 0.0}, spec{0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        phys += f[i] * std::conj(h[i]);
        spec += F[i] * std::conj(H[i]);
    }
    phys *= g.cell_volume();
    spec *= g.dual_cell_volume() / std::pow(two_pi, 2);
    EXPECT_LE(std::abs(phys - spec), 1e-10 * std::abs(phys));
}

TEST(Fourier, RejectsNonFiniteInput) {
    const PhaseGrid g(1, 8, 1.0);
    PhaseField f(g);
    f.values()[5] = cdouble(std::numeric_limits<double>::quiet_NaN(), 0.0);
    EXPECT_THROW(fourier_forward(f), DataError);
    EXPECT_THROW(PhaseField(g, std::vector<cdouble>(g.size(), cdouble(INFINITY, 0.0))), DataError);
    EXPECT_THROW(PhaseField(g, std::vector<cdouble>(3)), DataError);
}

TEST(Norms, GaussianNormIsSqrtPi) {
    const PhaseGrid g(1, 64, 10.0);
    EXPECT_NEAR(l2_norm(standard_gaussian(g)) / std::sqrt(std::numbers::pi), 1.0, 1e-8);
}

TEST(Norms, MaskOfOnesEqualsFullNorm) {
    const PhaseGrid g(1, 32, 6.0);
    const auto f = standard_gaussian(g);
    EXPECT_EQ(l2_norm(f, GridMask::ones(g)), l2_norm(f));
}

TEST(Norms, HalfBoxMaskOfCenteredGaussian) {
    const PhaseGrid g(1, 256, 10.0);
    const auto f = standard_gaussian(g);
    GridMask half{g, std::vector<std::uint8_t>(g.size(), 0)};
    double axis_row = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto z = g.point(i);
        half.values[i] = z[0] >= 0.0 ? 1 : 0;
        if (z[0] == 0.0) axis_row += std::norm(f[i]);
    }
    // Mirror symmetry x -> -x pairs every node with x > 0 to one with x < 0; the x = 0 row is
    // counted once, and the unpaired x = -L row is below double precision.
    const double full_sq = std::pow(l2_norm(f), 2);
    const double expected = std::sqrt(0.5 * (full_sq + g.cell_volume() * axis_row));
    EXPECT_NEAR(l2_norm(f, half), expected, 1e-12 * expected);
    EXPECT_NEAR(l2_norm(f, half), l2_norm(f) / std::sqrt(2.0), 0.05 * l2_norm(f));
}

TEST(Norms, MaskGridMismatchIsRejected) {
    const PhaseGrid g(1, 16, 2.0), other(1, 16, 3.0);
    EXPECT_THROW(l2_norm(PhaseField(g), GridMask::ones(other)), GridMismatch);
}

TEST(BandProject, DegenerateBallKeepsOnlyOrigin) {
    Rng rng(5);
    const PhaseGrid g(1, 16, 2.0);
    const auto F = kolmo::testing::random_spectral(g, rng);
    const auto P = band_project(F, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(P[i], i == 0 ? F[0] : cdouble(0.0, 0.0));
}

TEST(BandProject, LargeRadiusIsIdentityAndProjectionIsIdempotent) {
    Rng rng(6);
    const PhaseGrid g(2, 8, 2.0);
    const auto F = kolmo::testing::random_spectral(g, rng);
    const auto all = band_project(F, 2.0 * g.nyquist());
    EXPECT_EQ(all.values(), F.values());
    const auto once = band_project(F, 3.3);
    const auto twice = band_project(once, 3.3);
    EXPECT_EQ(once.values(), twice.values());
    EXPECT_THROW(band_project(F, -1.0), InvalidArgument);
}

TEST(BandProject, BandAndTailArePythagorean) {
    Rng rng(8);
    const PhaseGrid g(1, 32, 4.0);
    for (double N : {0.5, 2.0, 5.0, 9.0}) {
        const auto f = kolmo::testing::random_field(g, rng);
        const auto rep = norm_report(f, GridMask::ones(g), N);
        const double total = l2_norm(fourier_forward(f));
        EXPECT_NEAR(rep.band_norm * rep.band_norm + rep.tail_norm * rep.tail_norm, total * total,
                    1e-10 * total * total);
        EXPECT_LE(rep.restricted_norm, rep.full_norm);
    }
}

TEST(MixtureNorm, StandardGaussianIsSqrtPi) {
    const GaussianMixtureState s(1, {kolmo::testing::gaussian_term(1)});
    EXPECT_NEAR(mixture_norm(s), std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_NEAR(mixture_physical_norm(s), std::sqrt(std::numbers::pi) / two_pi, 1e-14);
}

TEST(MixtureNorm, OppositeAmplitudesCancel) {
    const GaussianMixtureState s(1, {kolmo::testing::gaussian_term(1, 1.0), kolmo::testing::gaussian_term(1, -1.0)});
    EXPECT_EQ(mixture_norm(s), 0.0);
}

TEST(MixtureNorm, RejectsNonPositiveDefiniteRealPart) {
    auto t = kolmo::testing::gaussian_term(1);
    t.quadratic(1, 1) = -0.5;
    EXPECT_THROW(GaussianMixtureState(1, {t}), InvalidArgument);
}

TEST(MixtureNorm, MatchesGridQuadratureForRandomMixtures) {
    Rng rng(21);
    const PhaseGrid g(1, 128, 10.0); // dual box [-Nyq, Nyq) with Nyq = 20.1
    for (int trial = 0; trial < 5; ++trial) {
        RandomMixtureSpec spec;
        spec.terms = 2;
        const auto s = random_mixture(1, spec, rng);
        // Complex quadratic forms exercise the determinant branch and the cross terms.
        auto terms = s.terms();
        for (auto& t : terms) {
            t.quadratic(0, 1) += cdouble(0.0, 0.3);
            t.quadratic(1, 0) += cdouble(0.0, 0.3);
            t.quadratic(0, 0) += cdouble(0.0, -0.4);
        }
        const GaussianMixtureState cs(1, terms);
        for (const auto* state : {&s, &cs}) {
            ASSERT_LE(mixture_energy_outside(*state, g.nyquist(), true), 1e-12);
            const double quad = l2_norm(sample_mixture_spectral(g, *state));
            EXPECT_NEAR(mixture_norm(*state) / quad, 1.0, 1e-8);
        }
    }
}

TEST(MixtureNorm, PhysicalClosedFormMatchesInverseTransform) {
    Rng rng(22);
    const PhaseGrid g(1, 128, 10.0);
    RandomMixtureSpec spec;
    spec.terms = 2;
    auto terms = random_mixture(1, spec, rng).terms();
    terms[0].quadratic(0, 1) = terms[0].quadratic(1, 0) = terms[0].quadratic(0, 1) + cdouble(0.0, 0.5);
    terms[1].quadratic(1, 1) += cdouble(0.0, -0.7);
    const GaussianMixtureState s(1, terms);
    ASSERT_LE(mixture_energy_outside(s, g.half_width(), false), 1e-12);
    const auto via_fft = fourier_inverse(sample_mixture_spectral(g, s));
    const auto closed = sample_mixture_physical(g, s);
    EXPECT_LE(rel_l2(closed.values(), via_fft.values()), 1e-9);
    EXPECT_NEAR(l2_norm(closed) / mixture_physical_norm(s), 1.0, 1e-9);
}

TEST(Snapshot, RoundTripPreservesEveryBit) {
    Rng rng(9);
    const auto dir = std::filesystem::temp_directory_path() / "kolmo_snapshot_test";
    std::filesystem::create_directories(dir);
    for (int d : {1, 2}) {
        const PhaseGrid g(d, 8, 1.5 * d);
        const auto f = kolmo::testing::random_field(g, rng);
        write_snapshot(dir / "f.bin", f);
        const auto back = std::get<PhaseField>(read_snapshot(dir / "f.bin"));
        EXPECT_EQ(back.grid(), g);
        EXPECT_EQ(back.values(), f.values());
        const auto F = fourier_forward(f);
        write_snapshot(dir / "F.bin", F);
        EXPECT_EQ(std::get<SpectralField>(read_snapshot(dir / "F.bin")).values(), F.values());
    }
    const PhaseGrid g(1, 4, 1.0);
    GridMask m{g, {1, 0, 0, 1, 1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 1}};
    write_snapshot(dir / "m.bin", m);
    EXPECT_EQ(std::get<GridMask>(read_snapshot(dir / "m.bin")).values, m.values);
    std::filesystem::resize_file(dir / "m.bin", 50);
    EXPECT_THROW(read_snapshot(dir / "m.bin"), DataError);
    std::filesystem::remove_all(dir);
}
