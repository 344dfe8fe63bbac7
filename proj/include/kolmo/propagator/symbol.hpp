#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "kolmo/core/grid.hpp"

namespace kolmo {

/// min{t, t^3}; equals t^3 on [0, 1] and t beyond.
inline double min_t_t3(double t) { return std::min(t, t * t * t); }

/// Q(t, xi, eta) = t |eta + xi t / 2|^2 + t^3 |xi|^2 / 12, the completed square of
/// |eta|^2 t + eta.xi t^2 + |xi|^2 t^3 / 3. `zeta` = (xi_1..xi_d, eta_1..eta_d).
inline double symbol_exponent(double t, std::span<const double> zeta) {
    const std::size_t d = zeta.size() / 2;
    double shifted = 0.0, xi2 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        const double xi = zeta[a];
        const double s = zeta[d + a] + 0.5 * xi * t;
        shifted += s * s;
        xi2 += xi * xi;
    }
    return t * shifted + t * t * t * xi2 / 12.0;
}

/// The three-term form, kept for cross-checking the completed square.
inline double symbol_exponent_expanded(double t, std::span<const double> zeta) {
    const std::size_t d = zeta.size() / 2;
    double eta2 = 0.0, cross = 0.0, xi2 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        eta2 += zeta[d + a] * zeta[d + a];
        cross += zeta[d + a] * zeta[a];
        xi2 += zeta[a] * zeta[a];
    }
    return eta2 * t + cross * t * t + xi2 * t * t * t / 3.0;
}

struct SymbolEvaluation {
    double t = 0.0;
    std::vector<double> shift_target; // (xi, eta + xi t)
    double exponent = 0.0;            // Q >= 0
    double multiplier = 1.0;          // exp(-Q)
};

/// g^(t, zeta) = g^_0(shift_target) * multiplier.
inline SymbolEvaluation symbol(double t, std::span<const double> zeta) {
    if (!(t >= 0.0)) throw InvalidArgument("symbol: t must be >= 0");
    if (zeta.size() % 2 != 0 || zeta.empty()) throw InvalidArgument("symbol: zeta must have even length 2d");
    const std::size_t d = zeta.size() / 2;
    SymbolEvaluation s;
    s.t = t;
    s.shift_target.assign(zeta.begin(), zeta.end());
    for (std::size_t a = 0; a < d; ++a) s.shift_target[d + a] += zeta[a] * t;
    s.exponent = symbol_exponent(t, zeta);
    s.multiplier = std::exp(-s.exponent);
    return s;
}

} // namespace kolmo
