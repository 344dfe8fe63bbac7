#pragma once

#include <cstdint>
#include <random>

#include "kolmo/core/gaussian_mixture.hpp"

namespace kolmo {

// Seed of an independent substream: SplitMix64 finalizer over (seed, stream).
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Parameters of the random Gaussian family used by the experiments.
struct RandomMixtureSpec {
    int terms = 1;
    double min_eigenvalue = 0.6; // eigenvalues of the real quadratic form M
    double max_eigenvalue = 1.8;
    double center_radius = 0.8;  // |m_a| <= center_radius per axis (frequency offset)
    double phase_radius = 1.0;   // |b_a| <= phase_radius per axis (physical shift)
};

/// Random mixture with real symmetric positive-definite quadratic forms.
inline GaussianMixtureState random_mixture(int d, const RandomMixtureSpec& spec, Rng& rng) {
    const int n = 2 * d;
    std::vector<GaussianTerm> terms;
    for (int j = 0; j < spec.terms; ++j) {
        RMat A(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) A(r, c) = normal(rng);
        Eigen::HouseholderQR<RMat> qr(A);
        const RMat Q = qr.householderQ();
        RVec lam(n);
        for (int a = 0; a < n; ++a) lam(a) = uniform(rng, spec.min_eigenvalue, spec.max_eigenvalue);
        RMat M = Q * lam.asDiagonal() * Q.transpose();
        M = 0.5 * (M + M.transpose()).eval();
        GaussianTerm t;
        t.quadratic = M.cast<cdouble>();
        t.center = RVec(n);
        t.phase = RVec(n);
        for (int a = 0; a < n; ++a) {
            t.center(a) = uniform(rng, -spec.center_radius, spec.center_radius);
            t.phase(a) = uniform(rng, -spec.phase_radius, spec.phase_radius);
        }
        t.amplitude = std::polar(uniform(rng, 0.5, 1.5), uniform(rng, 0.0, two_pi));
        terms.push_back(std::move(t));
    }
    return GaussianMixtureState(d, std::move(terms));
}

} // namespace kolmo
