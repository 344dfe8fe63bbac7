#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kolmo/inequality/ledger.hpp"
#include "kolmo/inequality/restricted.hpp"
#include "kolmo/propagator/mixture_propagation.hpp"
#include "kolmo/telescope/time_set.hpp"

namespace kolmo {

constexpr double default_lambda = 0.95;

inline void check_lambda(double lambda) {
    // lambda^6 > 1/2 keeps beta positive.
    if (!(lambda < 1.0) || !(std::pow(lambda, 6) > 0.5))
        throw InvalidArgument("telescope: lambda must lie in (2^{-1/6}, 1), got " + std::to_string(lambda));
}

/// Geometric time sequence l_m = l + lambda^{m-1} (l1 - l), decreasing to the density point l.
struct TelescopeSequence {
    double l = 0.0;
    double l1 = 0.0;
    double lambda = default_lambda;
    std::vector<double> terms;    // l_1 .. l_M
    std::vector<double> measures; // |E ∩ (l_{m+1}, l_m)| for m = 1 .. M-1
    int M = 0;
    int m0 = 0; // containment index: (l, l_{m0}) lies inside the component of E holding l

    /// l_m for any m >= 1, including beyond the stored depth.
    double term(int m) const { return l + std::pow(lambda, m - 1) * (l1 - l); }
};

namespace detail {

inline int containment_index(const TimeSet::Interval& comp, double l, double lambda, double l1) {
    int m = 1;
    while (l + std::pow(lambda, m - 1) * (l1 - l) > comp.second) ++m;
    return m;
}

// First m in [1, m_max] violating 3|E ∩ (l_{m+1}, l_m)| >= l_m - l_{m+1}, or 0 when none does.
inline int first_measure_failure(const TimeSet& E, double l, double lambda, double l1, int m_max) {
    double hi = l1;
    for (int m = 1; m <= m_max; ++m) {
        const double lo = l + std::pow(lambda, m) * (l1 - l);
        if (3.0 * E.measure_in(lo, hi) < hi - lo) return m;
        hi = lo;
    }
    return 0;
}

inline const TimeSet::Interval& component_of(const TimeSet& E, double l) {
    const auto* c = E.component(l);
    if (!c) throw InvalidArgument("telescope: l must be an interior point of E");
    return *c;
}

} // namespace detail

/// Build l_1 .. l_M and certify the measure condition for every m (checked up to the containment
/// index, automatic beyond it since then the whole interval sits inside E).
inline TelescopeSequence build_sequence(const TimeSet& E, double l, double lambda, double l1, int M) {
    check_lambda(lambda);
    const auto& comp = detail::component_of(E, l);
    if (!(l < l1) || !(l1 <= E.T())) throw InvalidArgument("build_sequence: need l < l1 <= T");
    if (M < 2) throw InvalidArgument("build_sequence: depth M must be at least 2");
    TelescopeSequence s;
    s.l = l;
    s.l1 = l1;
    s.lambda = lambda;
    s.M = M;
    s.m0 = detail::containment_index(comp, l, lambda, l1);
    const int m_check = std::max(M - 1, s.m0);
    if (const int bad = detail::first_measure_failure(E, l, lambda, l1, m_check))
        throw SequenceError("build_sequence: measure condition 3|E ∩ (l_{m+1}, l_m)| >= l_m - l_{m+1} fails at m = " +
                                std::to_string(bad) + "; shrink l1",
                            bad);
    for (int m = 1; m <= M; ++m) s.terms.push_back(s.term(m));
    for (int m = 1; m < M; ++m) s.measures.push_back(E.measure_in(s.term(m + 1), s.term(m)));
    return s;
}

/// Largest l1 in (l, T] passing the measure condition: T itself if it passes, otherwise the first
/// passing candidate of a downward scan refined by bisection against the failing one above it.
inline double choose_l1(const TimeSet& E, double l, double lambda, int candidates = 200) {
    check_lambda(lambda);
    const auto& comp = detail::component_of(E, l);
    auto passes = [&](double l1) {
        const int m0 = detail::containment_index(comp, l, lambda, l1);
        return detail::first_measure_failure(E, l, lambda, l1, m0) == 0;
    };
    const double T = E.T();
    if (passes(T)) return T;
    double fail = T;
    for (int i = 1; i <= candidates; ++i) {
        const double c = T - (T - l) * i / candidates;
        if (c <= l) break;
        if (passes(c)) {
            double ok = c;
            for (int it = 0; it < 60 && fail - ok > 1e-14 * T; ++it) {
                const double mid = 0.5 * (ok + fail);
                (passes(mid) ? ok : fail) = mid;
            }
            return ok;
        }
        fail = c;
    }
    // (l, b] with b the right end of l's component always passes.
    return std::min(comp.second, T);
}

struct TelescopeConstants {
    double C1 = 0.0;
    double beta = 0.0;
    double C2 = 0.0;
    double log_C_obs = 0.0; // C_obs = 3 e^{C1 + beta C2 / (l1 - l3)^3}, overflows for realistic C1

    double C_obs() const { return std::exp(log_C_obs); }
};

inline double telescope_beta(double lambda) {
    const double l6 = std::pow(lambda, 6);
    return l6 / (2.0 * l6 - 1.0);
}

inline TelescopeConstants assemble_constants(const TelescopeSequence& seq, double C1) {
    check_lambda(seq.lambda);
    if (!(C1 > 0.0) || !std::isfinite(C1)) throw InvalidArgument("assemble_constants: C1 must be positive");
    const double lam = seq.lambda;
    const double d12 = seq.term(1) - seq.term(2), d13 = seq.term(1) - seq.term(3);
    TelescopeConstants c;
    c.C1 = C1;
    c.beta = telescope_beta(lam);
    c.C2 = std::pow(1.0 + 1.0 / lam, 3) * (C1 + lam * lam * lam * d12 * d12);
    c.log_C_obs = std::log(3.0) + C1 + c.beta * c.C2 / (d13 * d13 * d13);
    return c;
}

/// log of the per-step choice eps_m = e^{-(beta - 1) C2 / (l_m - l_{m+2})^3}.
inline double log_step_eps(const TelescopeSequence& seq, const TelescopeConstants& c, int m) {
    const double gap = seq.term(m) - seq.term(m + 2);
    return -(c.beta - 1.0) * c.C2 / (gap * gap * gap);
}

/// Constant of ||g(t2)|| <= eps^{-1} e^{C(1 + 1/(t2-t1)^3)} ||g(t2)||_omega + eps ||g(t1)|| derived from
/// the interpolation estimate at alpha = 1/2: the theorem constant there is K + ln 2 with
/// K = (C1 + C2 + C3)^2 / C2, and Young's inequality quadruples it.
inline double telescope_C1(double C1_norm, const DecayConstants& k) {
    const double K = (C1_norm + k.C2 + k.C3) * (C1_norm + k.C2 + k.C3) / k.C2;
    return 4.0 * K + 4.0 * std::log(2.0);
}

struct CobsInterval {
    double T = 0.0;
    double lambda = default_lambda;
    double l = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
    TelescopeConstants constants;
    double C_exhibited = 0.0; // C with C_obs = e^{C (1 + 1/T^3)} at this T
    // Same constants with the gap l1 - l3 fixed at 3T/4.
    double log_C_obs_fixed_gap = 0.0;
    double C_exhibited_fixed_gap = 0.0;
};

/// Assembly specialized to E = (0, T) with l1 = T.
inline CobsInterval cobs_interval(double T, double C1, double lambda = default_lambda) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("cobs_interval: T must be positive");
    check_lambda(lambda);
    const TimeSet E(T, {{0.0, T}});
    CobsInterval r;
    r.T = T;
    r.lambda = lambda;
    const auto seq = build_sequence(E, find_density_point(E), lambda, T, 3);
    r.l = seq.l;
    r.l1 = seq.term(1);
    r.l2 = seq.term(2);
    r.l3 = seq.term(3);
    r.constants = assemble_constants(seq, C1);
    const double shape = 1.0 + 1.0 / (T * T * T);
    r.C_exhibited = r.constants.log_C_obs / shape;
    const double gap = 0.75 * T;
    r.log_C_obs_fixed_gap = std::log(3.0) + C1 + r.constants.beta * r.constants.C2 / (gap * gap * gap);
    r.C_exhibited_fixed_gap = r.log_C_obs_fixed_gap / shape;
    return r;
}

struct ScalingAudit {
    std::vector<double> T, x, y; // x = 1/T^3, y = log C_obs
    double slope = 0.0, intercept = 0.0;
    double max_residual = 0.0;
    double relative_residual = 0.0; // max |residual| / (max y - min y)
};

/// Least-squares fit of log C_obs against 1/T^3 over the given horizons.
inline ScalingAudit cobs_scaling_audit(const std::vector<double>& Ts, double C1, double lambda = default_lambda) {
    if (Ts.size() < 3) throw InvalidArgument("cobs_scaling_audit: need at least three horizons");
    ScalingAudit a;
    for (double T : Ts) {
        a.T.push_back(T);
        a.x.push_back(1.0 / (T * T * T));
        a.y.push_back(cobs_interval(T, C1, lambda).constants.log_C_obs);
    }
    const double n = static_cast<double>(Ts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < Ts.size(); ++i) {
        sx += a.x[i];
        sy += a.y[i];
        sxx += a.x[i] * a.x[i];
        sxy += a.x[i] * a.y[i];
    }
    a.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    a.intercept = (sy - a.slope * sx) / n;
    for (std::size_t i = 0; i < Ts.size(); ++i)
        a.max_residual = std::max(a.max_residual, std::abs(a.y[i] - a.intercept - a.slope * a.x[i]));
    const auto [lo, hi] = std::minmax_element(a.y.begin(), a.y.end());
    a.relative_residual = a.max_residual / (*hi - *lo);
    return a;
}

struct TelescopeStep {
    int m = 0;
    double l_m = 0.0;
    double measure = 0.0;      // |E ∩ (l_{m+1}, l_m)|
    double log_a = 0.0;        // log of e^{-beta C2/(l_m - l_{m+2})^3} ||g(l_m)||
    double log_a_next = 0.0;   // same at m + 2
    double log_lhs = 0.0;      // log(a_m - a_{m+2}), -inf when the difference is <= 0
    double log_rhs = 0.0;      // log of 3 e^{C1} ∫_{E ∩ (l_{m+1}, l_m)} ||g(s)||_omega ds
    bool holds = true;
};

struct AuxiliaryChainRow {
    int m = 0;
    double three_measure = 0.0; // 3|E ∩ (l_{m+1}, l_m)|
    double gap = 0.0;           // l_m - l_{m+1}
    double log_third = 0.0;     // -1/(l_m - l_{m+1})
    double log_fourth = 0.0;    // -lambda^3 (l1 - l2)^2 / (l_{m+1} - l_{m+2})^3
    bool holds = true;
};

struct ObservabilityReport {
    double lhs = 0.0;       // ||g(T)||
    double integral = 0.0;  // ∫_E ||g(t)||_omega dt
    double log_rhs = 0.0;   // log(C_obs * integral)
    double log_ratio = 0.0; // log(lhs / rhs)
    double quadrature_error = 0.0;
    int depth = 0; // telescoping pairs used: sum over k = 0..depth
    double telescoping_remainder = 0.0; // a_{2 depth + 3} / a_1
    double telescoping_identity_error = 0.0;
    bool sum_bound_holds = true; // a_1 <= 3 e^{C1} ∫_{E ∩ (l, l1)} ||g||_omega
    std::vector<TelescopeStep> steps;
    std::vector<AuxiliaryChainRow> auxiliary;
    int step_violations = 0;
    int auxiliary_violations = 0;
    int monotonicity_violations = 0;

    double rhs() const { return std::exp(log_rhs); }
    double ratio() const { return std::exp(log_ratio); }
};

struct ObservabilityOptions {
    double max_panel = 0.05;        // Gauss-Kronrod panel width in time
    std::size_t max_panels = 20000; // budget over all integrals
    double quadrature_rtol = 1e-6;  // Kronrod error estimate relative to the integral
    double remainder_tol = 1e-10;
    int max_depth = 100000;
    double sample_step = 0.03;
    double sigmas = 9.0;
};

namespace detail {

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Composite 15-point Gauss-Kronrod over a list of pieces with a shared panel budget.
class TimeIntegrator {
public:
    template <class F>
    TimeIntegrator(F f, const ObservabilityOptions& opt) : f_(std::move(f)), opt_(opt) {}

    double integrate(const std::vector<TimeSet::Interval>& pieces) {
        using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
        double total = 0.0;
        for (const auto& [a, b] : pieces) {
            const auto panels = static_cast<std::size_t>(std::ceil((b - a) / opt_.max_panel));
            used_ += panels;
            if (used_ > opt_.max_panels)
                throw GuardError("verify_observability: time quadrature needs more than " +
                                 std::to_string(opt_.max_panels) + " panels; raise max_panel or max_panels");
            const double w = (b - a) / static_cast<double>(panels);
            for (std::size_t p = 0; p < panels; ++p) {
                double err = 0.0;
                total += GK::integrate(f_, a + p * w, a + (p + 1) * w, 0, 0.0, &err);
                error_ += err;
            }
        }
        return total;
    }

    double error() const { return error_; }

private:
    std::function<double(double)> f_;
    ObservabilityOptions opt_;
    std::size_t used_ = 0;
    double error_ = 0.0;
};

} // namespace detail

/// Check ||g(T)|| <= C_obs ∫_E ||g(t)||_omega dt for the exact mixture trajectory, together with every
/// intermediate inequality of the telescoping argument.
inline ObservabilityReport verify_observability(const GaussianMixtureState& g0, const ThickSetDescriptor& omega,
                                                const TimeSet& E, const TelescopeSequence& seq,
                                                const TelescopeConstants& c, const ObservabilityOptions& opt = {}) {
    const double T = E.T();
    const auto gT = propagate_mixture(g0, T);
    auto norm_at = [&](double t) { return mixture_physical_norm(propagate_mixture(g0, t)); };
    // On the full space the restricted norm is the closed-form norm; elsewhere it is sampled.
    std::optional<RestrictedNormSampler> sampler;
    if (!std::holds_alternative<FullSpace>(omega))
        sampler.emplace(omega, covering_box({g0, gT}, opt.sigmas, opt.sample_step));
    detail::TimeIntegrator quad(
        [&](double t) { return sampler ? sampler->restricted(propagate_mixture(g0, t)) : norm_at(t); }, opt);
    const double inf = std::numeric_limits<double>::infinity();

    ObservabilityReport r;
    r.lhs = mixture_physical_norm(gT);

    // Split E at l and l1 so the (l, l1) part is a sum of the same panels.
    double inside = 0.0, outside = 0.0;
    for (const auto& [a, b] : E.intervals()) {
        const double cuts[] = {a, std::clamp(seq.l, a, b), std::clamp(seq.l1, a, b), b};
        for (int i = 0; i < 3; ++i) {
            if (!(cuts[i] < cuts[i + 1])) continue;
            const double v = quad.integrate({{cuts[i], cuts[i + 1]}});
            (i == 1 ? inside : outside) += v;
        }
    }
    r.integral = inside + outside;
    if (!(r.integral > 0.0)) throw ZeroRestrictedNorm("verify_observability: ∫_E ||g||_omega vanishes");
    r.quadrature_error = quad.error();
    if (r.quadrature_error > opt.quadrature_rtol * r.integral)
        throw GuardError("verify_observability: time quadrature under-resolved (error estimate " +
                         std::to_string(r.quadrature_error / r.integral) + " relative); lower max_panel");
    r.log_rhs = c.log_C_obs + std::log(r.integral);
    r.log_ratio = std::log(r.lhs) - r.log_rhs;

    auto log_a = [&](int m) {
        const double gap = seq.term(m) - seq.term(m + 2);
        return -c.beta * c.C2 / (gap * gap * gap) + std::log(norm_at(seq.term(m)));
    };
    const double log_a1 = log_a(1);
    const double log_tol = std::log(opt.remainder_tol);
    int depth = 0;
    double log_tail = log_a(3);
    while (log_tail - log_a1 > log_tol) {
        if (++depth > opt.max_depth) throw GuardError("verify_observability: telescoping remainder does not decay");
        log_tail = log_a(2 * depth + 3);
    }
    r.depth = depth;
    r.telescoping_remainder = std::exp(log_tail - log_a1);

    // Finite telescoping sum relative to a_1.
    double sum = 0.0;
    for (int k = 0; k <= depth; ++k)
        sum += std::exp(log_a(2 * k + 1) - log_a1) - std::exp(log_a(2 * k + 3) - log_a1);
    r.telescoping_identity_error = std::abs(sum - (1.0 - r.telescoping_remainder));

    const double log3c1 = std::log(3.0) + c.C1;
    for (int m = 1; m <= 2 * depth + 1; ++m) {
        TelescopeStep s;
        s.m = m;
        s.l_m = seq.term(m);
        s.measure = E.measure_in(seq.term(m + 1), s.l_m);
        s.log_a = log_a(m);
        s.log_a_next = log_a(m + 2);
        s.log_lhs = s.log_a > s.log_a_next ? s.log_a + std::log1p(-std::exp(s.log_a_next - s.log_a)) : -inf;
        const double part = quad.integrate(E.clip(seq.term(m + 1), s.l_m));
        s.log_rhs = part > 0.0 ? log3c1 + std::log(part) : -inf;
        s.holds = s.log_a <= detail::log_add(s.log_a_next, s.log_rhs) + 1e-12 * std::abs(s.log_a);
        r.step_violations += !s.holds;
        r.steps.push_back(s);
    }
    r.sum_bound_holds = log_a1 <= log3c1 + std::log(inside) + 1e-12 * std::abs(log_a1);

    const double d12 = seq.term(1) - seq.term(2);
    const double lam3 = seq.lambda * seq.lambda * seq.lambda;
    for (int m = 1; m <= std::max(seq.M - 1, 2 * depth + 1); ++m) {
        AuxiliaryChainRow a;
        a.m = m;
        a.gap = seq.term(m) - seq.term(m + 1);
        a.three_measure = 3.0 * E.measure_in(seq.term(m + 1), seq.term(m));
        const double next = seq.term(m + 1) - seq.term(m + 2);
        a.log_third = -1.0 / a.gap;
        a.log_fourth = -lam3 * d12 * d12 / (next * next * next);
        const double rtol = 1e-12;
        a.holds = a.three_measure >= a.gap * (1.0 - rtol) && std::log(a.gap) >= a.log_third - rtol &&
                  a.log_third >= a.log_fourth - rtol * std::abs(a.log_fourth);
        r.auxiliary_violations += !a.holds;
        r.auxiliary.push_back(a);
    }

    // Norm is non-increasing along the times the argument compares.
    std::vector<double> times{0.0, T};
    for (int m = 1; m <= 2 * depth + 5; ++m) times.push_back(seq.term(m));
    std::sort(times.begin(), times.end());
    double prev = norm_at(times.front());
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double now = norm_at(times[i]);
        r.monotonicity_violations += now > prev * (1.0 + 1e-12);
        prev = now;
    }
    return r;
}

} // namespace kolmo
