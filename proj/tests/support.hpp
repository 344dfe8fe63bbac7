#pragma once

#include <cmath>
#include <vector>

#include "kolmo/core/grid.hpp"
#include "kolmo/core/random.hpp"

namespace kolmo::testing {

inline double rel_l2(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

inline PhaseField random_field(const PhaseGrid& g, Rng& rng) {
    std::vector<cdouble> v(g.size());
    for (auto& z : v) z = {normal(rng), normal(rng)};
    return PhaseField(g, std::move(v));
}

inline SpectralField random_spectral(const PhaseGrid& g, Rng& rng) {
    std::vector<cdouble> v(g.size());
    for (auto& z : v) z = {normal(rng), normal(rng)};
    return SpectralField(g, std::move(v));
}

inline GaussianTerm gaussian_term(int d, cdouble amplitude = 1.0) {
    GaussianTerm t;
    t.amplitude = amplitude;
    t.center = RVec::Zero(2 * d);
    t.phase = RVec::Zero(2 * d);
    t.quadratic = CMat::Identity(2 * d, 2 * d);
    return t;
}

} // namespace kolmo::testing
