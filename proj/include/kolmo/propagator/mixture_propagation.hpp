#pragma once

#include "kolmo/core/gaussian_mixture.hpp"
#include "kolmo/propagator/symbol.hpp"

namespace kolmo {

namespace detail {

// L_t : (xi, eta) -> (xi, eta + t xi).
inline RMat shear_map(int d, double t) {
    RMat L = RMat::Identity(2 * d, 2 * d);
    for (int a = 0; a < d; ++a) L(d + a, a) = t;
    return L;
}

// Matrix of the quadratic form Q_t: zeta^T Q_t zeta = Q(t, xi, eta).
inline RMat symbol_form(int d, double t) {
    RMat Q = RMat::Zero(2 * d, 2 * d);
    for (int a = 0; a < d; ++a) {
        Q(a, a) = t * t * t / 3.0;
        Q(a, d + a) = Q(d + a, a) = 0.5 * t * t;
        Q(d + a, d + a) = t;
    }
    return Q;
}

} // namespace detail

/// Exact evolution of a mixture: each term is pulled back under L_t and the form 2 Q_t is added,
/// g^(t, zeta) = g^_0(L_t zeta) exp(-zeta^T Q_t zeta).
inline GaussianMixtureState propagate_mixture(const GaussianMixtureState& s, double t) {
    if (!(t >= 0.0)) throw InvalidArgument("propagate_mixture: t must be >= 0");
    if (t == 0.0) return s;
    const int d = s.d();
    const CMat L = detail::shear_map(d, t).cast<cdouble>();
    const CMat twoQ = (2.0 * detail::symbol_form(d, t)).cast<cdouble>();
    std::vector<GaussianTerm> out;
    out.reserve(s.terms().size());
    for (const auto& term : s.terms()) {
        const CMat M = L.transpose() * term.quadratic * L + twoQ;
        const CVec u = L.transpose() * term.linear();
        out.push_back(GaussianTerm::from_polynomial(M, u, std::log(term.amplitude) + term.constant()));
    }
    return GaussianMixtureState(d, std::move(out));
}

} // namespace kolmo
