#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kolmo/core/random.hpp"
#include "kolmo/propagator/decay.hpp"
#include "kolmo/thickness/thickness.hpp"

namespace kolmo {

// The ratio mirrors the unnormalized statement
//   \int_{B_N} |f^|^2  <=  e^{C(1+N)} \int_omega | \int_{B_N} f^(zeta) e^{i z.zeta} dzeta |^2 dz,
// whose inner integral is (2 pi)^{2d} f in our convention. On the full space the ratio is (2 pi)^{-2d}.

/// LHS/RHS for a band-limited spectral field F (support in the closed ball B_N).
inline double spectral_ratio(const SpectralField& F, const GridMask& mask, double N) {
    const auto& g = F.grid();
    if (!(N >= 0.0)) throw InvalidArgument("spectral_ratio: N must be >= 0");
    detail::check_mask(g, mask);
    if (mask.count() == 0) throw InvalidArgument("spectral_ratio: mask has zero measure");
    const double total = std::pow(l2_norm(F), 2);
    const double outside = tail_mass(F, N);
    if (outside > 1e-20 * total) throw InvalidArgument("spectral_ratio: field is not band-limited to B_N");
    const double restricted = std::pow(l2_norm(fourier_inverse(F), mask), 2);
    if (!(restricted > 0.0)) throw ZeroRestrictedNorm("spectral_ratio: restricted norm vanishes, ratio undefined");
    return total / (std::pow(two_pi, 4 * g.d()) * restricted);
}

inline double spectral_ratio(const PhaseField& f, const GridMask& mask, double N) {
    return spectral_ratio(fourier_forward(f), mask, N);
}

/// Norm-form constant of the spectral inequality, ||f|| <= e^{C1 (1+N)} ||f||_omega, from the fitted
/// squared-form constant: the (2 pi)^d Plancherel factor is absorbed via 1 + N >= 1.
inline double norm_form_constant(double fitted_C, int d) { return 0.5 * fitted_C + d * std::log(two_pi); }

struct SpectralFitOptions {
    std::vector<double> N_list{1.0, 2.0, 4.0, 8.0};
    int random_samples = 16;      // per N
    int adversarial_samples = 2;  // per N
    int power_iterations = 60;
    std::uint64_t seed = 0;
};

struct SpectralRow {
    double N = 0.0;
    double worst_ratio = 0.0;
    double worst_random = 0.0;
    double worst_adversarial = 0.0;
    double fitted_C = 0.0; // ln(worst_ratio) / (1 + N)
};

struct SpectralTestReport {
    std::vector<SpectralRow> rows;
    double fitted_C = 0.0; // max(0, max over rows)
    double C1_norm = 0.0;  // norm_form_constant(fitted_C, d)
    std::string family;
    std::uint64_t seed = 0;
    std::string warning; // set when omega is not certified thick
};

namespace detail {

inline SpectralField random_band_limited(const PhaseGrid& g, double N, Rng& rng) {
    const auto band = band_mask(g, N);
    std::vector<cdouble> v(g.size(), cdouble{0.0, 0.0});
    for (std::size_t i = 0; i < g.size(); ++i)
        if (band.values[i]) v[i] = cdouble(normal(rng), normal(rng));
    return SpectralField(g, std::move(v));
}

// Power iteration for P_N (1 - chi_omega) P_N: drives the sample towards the band-limited function
// with the largest share of its mass off omega.
inline SpectralField concentrate_off(SpectralField F, const GridMask& mask, double N, int iterations) {
    for (int it = 0; it < iterations; ++it) {
        auto f = fourier_inverse(F);
        std::vector<cdouble> v = f.values();
        for (std::size_t i = 0; i < v.size(); ++i)
            if (mask.values[i]) v[i] = cdouble{0.0, 0.0};
        F = band_project(fourier_forward(PhaseField(f.grid(), std::move(v))), N);
        const double n = l2_norm(F);
        if (!(n > 0.0)) break;
        std::vector<cdouble> w = F.values();
        for (auto& x : w) x /= n;
        F = SpectralField(F.grid(), std::move(w));
    }
    return F;
}

inline double safe_ratio(const SpectralField& F, const GridMask& mask, double N) {
    try {
        return spectral_ratio(F, mask, N);
    } catch (const ZeroRestrictedNorm&) {
        return std::numeric_limits<double>::infinity();
    }
}

} // namespace detail

/// Worst ratio over random band-limited samples and adversarial samples concentrated off the mask.
inline SpectralTestReport fit_spectral_constant(const GridMask& mask, const SpectralFitOptions& opt) {
    const auto& g = mask.grid;
    if (mask.count() == 0) throw InvalidArgument("fit_spectral_constant: mask has zero measure");
    SpectralTestReport rep;
    rep.seed = opt.seed;
    rep.family = std::to_string(opt.random_samples) +
                 " random band-limited fields (iid complex normal coefficients on B_N) and " +
                 std::to_string(opt.adversarial_samples) + " adversarial fields (" +
                 std::to_string(opt.power_iterations) + " power steps concentrating mass off omega) per N";
    const bool full = mask.count() == mask.values.size();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < opt.N_list.size(); ++n) {
        const double N = opt.N_list[n];
        if (!(N >= 0.0)) throw InvalidArgument("fit_spectral_constant: N must be >= 0");
        SpectralRow row;
        row.N = N;
        for (int s = 0; s < opt.random_samples; ++s) {
            Rng rng(substream_seed(opt.seed, n * 4096 + static_cast<std::uint64_t>(s)));
            row.worst_random = std::max(row.worst_random, detail::safe_ratio(detail::random_band_limited(g, N, rng), mask, N));
        }
        if (!full) {
            std::vector<std::size_t> off;
            for (std::size_t i = 0; i < mask.values.size(); ++i)
                if (!mask.values[i]) off.push_back(i);
            for (int s = 0; s < opt.adversarial_samples; ++s) {
                // First start: the complement indicator; then point masses at random complement nodes.
                std::vector<cdouble> v(g.size(), cdouble{0.0, 0.0});
                if (s == 0) {
                    for (auto i : off) v[i] = 1.0;
                } else {
                    Rng rng(substream_seed(opt.seed, n * 4096 + 2048 + static_cast<std::uint64_t>(s)));
                    v[off[static_cast<std::size_t>(uniform(rng, 0.0, 1.0) * static_cast<double>(off.size())) % off.size()]] = 1.0;
                }
                auto F = band_project(fourier_forward(PhaseField(g, std::move(v))), N);
                if (!(l2_norm(F) > 0.0)) continue;
                F = detail::concentrate_off(std::move(F), mask, N, opt.power_iterations);
                row.worst_adversarial = std::max(row.worst_adversarial, detail::safe_ratio(F, mask, N));
            }
        }
        row.worst_ratio = std::max(row.worst_random, row.worst_adversarial);
        row.fitted_C = std::log(row.worst_ratio) / (1.0 + N);
        best = std::max(best, row.fitted_C);
        rep.rows.push_back(row);
    }
    rep.fitted_C = std::max(0.0, best);
    rep.C1_norm = norm_form_constant(rep.fitted_C, g.d());
    return rep;
}

/// Descriptor front end: builds the grid mask and warns when the set is not certified thick.
inline SpectralTestReport fit_spectral_constant(const ThickSetDescriptor& set, const PhaseGrid& g,
                                                const SpectralFitOptions& opt) {
    auto rep = fit_spectral_constant(grid_mask(set, g), opt);
    if (std::holds_alternative<HalfSpace>(set)) {
        rep.warning = "omega is a half-space, which is not thick; ratios may grow without bound";
    } else if (!std::holds_alternative<FullSpace>(set)) {
        try {
            if (std::holds_alternative<UnionBoxes>(set) && !std::get<UnionBoxes>(set).periodic)
                rep.warning = "omega is a bounded union of boxes, which is not thick";
            else
                minimal_delta(set, 0.5 * g.spacing(), g.spacing());
        } catch (const NotThick&) {
            rep.warning = "omega contains no ball of radius h/2; thickness not certified";
        }
    }
    return rep;
}

} // namespace kolmo
