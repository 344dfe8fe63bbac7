#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "kolmo/propagator/decay.hpp"

namespace kolmo {

/// Constants of the interpolation chain, all in norm form (not squared).
/// C_tilde1 overflows double for realistic inputs, so it is carried as a logarithm.
struct ConstantLedger {
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double alpha = 0.5;
    double k_alpha = 1.0;
    double T = 1.0;
    double T31 = 1.0;
    double log_C_tilde1 = 0.0;

    static ConstantLedger make(double C1, const DecayConstants& k, double alpha, double T) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("ConstantLedger: alpha must lie in (0, 1)");
        if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("ConstantLedger: T must be positive");
        if (!(C1 >= 0.0) || !std::isfinite(C1)) throw InvalidArgument("ConstantLedger: C1 must be >= 0");
        k.validate();
        ConstantLedger L;
        L.C1 = C1;
        L.C2 = k.C2;
        L.C3 = k.C3;
        L.alpha = alpha;
        L.k_alpha = alpha / (1.0 - alpha);
        L.T = T;
        L.T31 = min_t_t3(T);
        L.log_C_tilde1 = std::max(L.log_first_branch(), L.log_second_branch());
        return L;
    }

    // e^{C1 + C1^2 / (2 k C2 T31)}
    double log_first_branch() const { return C1 + C1 * C1 / (2.0 * k_alpha * C2 * T31); }
    // 2 e^{C1 + C3 + C1^2 / (2 C2 T31)}
    double log_second_branch() const { return std::log(2.0) + C1 + C3 + C1 * C1 / (2.0 * C2 * T31); }

    double C_tilde1() const { return std::exp(log_C_tilde1); }

    /// (C1 + C2 + C3)^2 / C2: the constant C of the final estimate up to the factor 1/alpha.
    double envelope_constant() const { return (C1 + C2 + C3) * (C1 + C2 + C3) / C2; }

    /// log of 2 e^{(C1+C2+C3)^2/(C2 alpha) (1 + 1/T^3)}.
    double log_envelope() const { return std::log(2.0) + envelope_constant() / alpha * (1.0 + 1.0 / (T * T * T)); }
};

struct YoungSplitMargins {
    double first = 0.0;  // rhs - lhs of C1 N <= C1^2/(2 k C2 T31) + k C2 N^2 T31 / 2
    double second = 0.0; // rhs - lhs of C1 N - C2 N^2 T31 <= C1^2/(2 C2 T31) - C2 N^2 T31 / 2
};

inline YoungSplitMargins young_split(const ConstantLedger& L, double N) {
    const double a = L.C2 * L.T31;
    YoungSplitMargins m;
    m.first = L.C1 * L.C1 / (2.0 * L.k_alpha * a) + 0.5 * L.k_alpha * a * N * N - L.C1 * N;
    m.second = L.C1 * L.C1 / (2.0 * a) - 0.5 * a * N * N - (L.C1 * N - a * N * N);
    return m;
}

struct EpsilonMinimum {
    double eps_star = 0.0;
    double min_value = 0.0;
    bool boundary = false; // a = 0: infimum approached as eps -> 0
};

/// Minimizer of eps^{-k} a + eps b over eps > 0.
inline EpsilonMinimum epsilon_minimize(double a, double b, double k) {
    if (!(a >= 0.0) || !(b > 0.0) || !(k > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(k))
        throw InvalidArgument("epsilon_minimize: need a >= 0, b > 0, k > 0");
    if (a == 0.0) return {0.0, 0.0, true};
    const double p = 1.0 / (k + 1.0);
    EpsilonMinimum r;
    r.eps_star = std::pow(k * a / b, p);
    r.min_value = std::pow(a, p) * std::pow(b, k * p) * (std::pow(k, p) + std::pow(k, -k * p));
    return r;
}

} // namespace kolmo
