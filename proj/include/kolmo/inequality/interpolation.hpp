#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

#include "kolmo/inequality/ledger.hpp"
#include "kolmo/inequality/restricted.hpp"
#include "kolmo/propagator/mixture_propagation.hpp"

namespace kolmo {

struct InterpolationBound {
    EpsilonMinimum eps;
    double log_bound = 0.0;           // log of C_tilde1 * min over eps
    double product_form_mismatch = 0; // relative gap between min_value and k-form a^{1-alpha} b^alpha
    double audit_N = 0.0;             // splitting frequency minimizing the N-dependent bound
    double log_audit_bound = 0.0;     // log of that minimum

    double bound() const { return std::exp(log_bound); }
};

/// Log of e^{C1(N+1)} a + 2 e^{C1(N+1) + C3 - C2 N^2 T31} b.
inline double log_split_bound(const ConstantLedger& L, double N, double a, double b) {
    const double tail = std::log(2.0 * b) + L.C3 - L.C2 * N * N * L.T31;
    const double head = a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
    const double hi = std::max(head, tail), lo = std::min(head, tail);
    return L.C1 * (N + 1.0) + hi + std::log1p(std::exp(lo - hi));
}

namespace detail {

// Minimize the split bound over N >= 0: coarse scan, then golden section around the best node.
inline std::pair<double, double> minimize_split(const ConstantLedger& L, double a, double b) {
    const double c = L.C2 * L.T31;
    if (a == 0.0) return {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    const double reach = std::max(0.0, L.C3 + std::log(2.0 * b / a) + 40.0);
    const double n_max = std::sqrt(reach / c) + 1.0;
    const int nodes = 4000;
    auto f = [&](double N) { return log_split_bound(L, N, a, b); };
    int best = 0;
    double fbest = f(0.0);
    for (int i = 1; i <= nodes; ++i) {
        const double v = f(n_max * i / nodes);
        if (v < fbest) {
            fbest = v;
            best = i;
        }
    }
    double lo = n_max * std::max(0, best - 1) / nodes, hi = n_max * std::min(nodes, best + 1) / nodes;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    const double xs = 0.5 * (lo + hi);
    const double fs = f(xs);
    return fs < fbest ? std::pair{xs, fs} : std::pair{n_max * best / nodes, fbest};
}

} // namespace detail

/// Explicit right-hand side C_tilde1 [eps^{-k} a + eps b] at the optimal eps, with a = ||g(T)||_omega
/// and b = ||g0||, plus the audit minimum of the N-dependent bound it was derived from.
/// An optimal eps >= 1 still gives a valid bound since then eps b >= ||g0|| >= ||g(T)||.
inline InterpolationBound assemble_interpolation_bound(const ConstantLedger& L, double norm_gT_omega, double norm_g0) {
    if (!(L.alpha > 0.0 && L.alpha < 1.0)) throw InvalidArgument("assemble_interpolation_bound: alpha outside (0, 1)");
    if (!(L.T > 0.0)) throw InvalidArgument("assemble_interpolation_bound: T must be positive");
    if (!(norm_g0 > 0.0) || !(norm_gT_omega >= 0.0))
        throw InvalidArgument("assemble_interpolation_bound: need ||g0|| > 0 and ||g(T)||_omega >= 0");
    InterpolationBound out;
    out.eps = epsilon_minimize(norm_gT_omega, norm_g0, L.k_alpha);
    if (out.eps.boundary) {
        out.log_bound = -std::numeric_limits<double>::infinity();
    } else {
        out.log_bound = L.log_C_tilde1 + std::log(out.eps.min_value);
        const double k = L.k_alpha;
        const double product = std::pow(norm_gT_omega, 1.0 - L.alpha) * std::pow(norm_g0, L.alpha) *
                               (std::pow(k, 1.0 - L.alpha) + std::pow(k, -L.alpha));
        out.product_form_mismatch = std::abs(out.eps.min_value - product) / product;
    }
    std::tie(out.audit_N, out.log_audit_bound) = detail::minimize_split(L, norm_gT_omega, norm_g0);
    return out;
}

struct InterpolationReport {
    double T = 0.0;
    double alpha = 0.0;
    double lhs = 0.0;        // ||g(T)||
    double restricted = 0.0; // ||g(T)||_omega (sampled)
    double norm_g0 = 0.0;
    double envelope_constant = 0.0; // C = (C1 + C2 + C3)^2 / C2
    double log_rhs = 0.0;           // log of e^{C/alpha (1 + 1/T^3)} restricted^{1-alpha} norm_g0^alpha
    double observed_constant = 0.0; // smallest C for which the estimate holds on this instance
    InterpolationBound chain;       // explicit proof-chain bound with the same C1

    double rhs() const { return std::exp(log_rhs); }
};

struct InterpolationOptions {
    std::optional<DecayConstants> constants; // defaults(d) when unset
    double sample_step = 0.02;
    double sigmas = 9.0;
};

/// Propagate g0 exactly to T and compare ||g(T)|| with the interpolation estimate.
/// C1 is the norm-form spectral constant of omega.
inline InterpolationReport verify_interpolation(const GaussianMixtureState& g0, const ThickSetDescriptor& omega,
                                                double T, double alpha, double C1,
                                                const InterpolationOptions& opt = {}) {
    if (!(T > 0.0)) throw InvalidArgument("verify_interpolation: T must be positive");
    const auto L = ConstantLedger::make(C1, opt.constants.value_or(DecayConstants::defaults(g0.d())), alpha, T);
    const auto gT = propagate_mixture(g0, T);
    const RestrictedNormSampler sampler(omega, covering_box({gT}, opt.sigmas, opt.sample_step));
    InterpolationReport r;
    r.T = T;
    r.alpha = alpha;
    r.lhs = mixture_physical_norm(gT);
    r.norm_g0 = mixture_physical_norm(g0);
    r.restricted = sampler.restricted(gT);
    if (!(r.restricted > 0.0)) throw ZeroRestrictedNorm("verify_interpolation: ||g(T)||_omega vanishes");
    const double shape = 1.0 + 1.0 / (T * T * T);
    const double log_mix = (1.0 - alpha) * std::log(r.restricted) + alpha * std::log(r.norm_g0);
    r.envelope_constant = L.envelope_constant();
    r.log_rhs = r.envelope_constant / alpha * shape + log_mix;
    r.observed_constant = alpha * (std::log(r.lhs) - log_mix) / shape;
    r.chain = assemble_interpolation_bound(L, r.restricted, r.norm_g0);
    return r;
}

} // namespace kolmo
