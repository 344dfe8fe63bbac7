#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kolmo/core/gaussian_mixture.hpp"
#include "kolmo/core/norms.hpp"
#include "kolmo/propagator/symbol.hpp"

namespace kolmo {

/// Constants of the Fourier-side decay estimate.
///   pointwise: |g^(t, zeta)| <= |g^_0(L_t zeta)| exp(-|zeta|^2 min{t,t^3} c_pointwise)
///   tail:      \int_{|zeta|>N} |g^(T)|^2 <= exp(-N^2 min{T,T^3} c_exponent) ||g^_0||^2
/// In squared physical-norm form the tail reads exp(2 [C3 - C2 N^2 min{T,T^3}]) ||g_0||^2.
struct DecayConstants {
    double c_exponent = 1.0 / 15.0;
    double c_pointwise = 1.0 / 30.0;
    double C2 = 1.0 / 30.0;
    double C3 = 0.0;

    static DecayConstants defaults(int d) {
        DecayConstants k;
        k.C3 = d * std::log(two_pi);
        return k;
    }

    // Overrides keep c_exponent = 2 C2.
    static DecayConstants with_exponent(int d, double c_exponent) {
        auto k = defaults(d);
        k.c_exponent = c_exponent;
        k.c_pointwise = 0.5 * c_exponent;
        k.C2 = 0.5 * c_exponent;
        return k;
    }

    void validate() const {
        if (!(c_exponent > 0.0) || std::abs(c_exponent - 2.0 * C2) > 1e-15 * c_exponent)
            throw InvalidArgument("DecayConstants: need c_exponent = 2 C2 > 0");
        if (!(C3 >= 0.0)) throw InvalidArgument("DecayConstants: C3 must be >= 0");
    }
};

inline double decay_bound(double N, double T, double spectral_norm_sq_g0, const DecayConstants& k) {
    if (!(T > 0.0)) throw InvalidArgument("decay_bound: T must be > 0");
    if (!(N >= 0.0)) throw InvalidArgument("decay_bound: N must be >= 0");
    return std::exp(-N * N * min_t_t3(T) * k.c_exponent) * spectral_norm_sq_g0;
}

/// Squared mass of a spectral field outside the closed ball B_N.
inline double tail_mass(const SpectralField& F, double N) {
    if (!(N >= 0.0)) throw InvalidArgument("tail_mass: N must be >= 0");
    const auto& g = F.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i)
        if (detail::radius(g.dual_point(i), g.axes()) > N) s += std::norm(F[i]);
    return s * g.dual_cell_volume();
}

namespace detail {

// Flat-array evaluator of g^ for the quadrature loops.
class FastSpectralEvaluator {
public:
    explicit FastSpectralEvaluator(const GaussianMixtureState& s) : n_(s.dims()) {
        for (const auto& t : s.terms()) {
            Term c;
            c.amplitude = t.amplitude;
            c.center.assign(t.center.data(), t.center.data() + n_);
            c.phase.assign(t.phase.data(), t.phase.data() + n_);
            c.M.resize(static_cast<std::size_t>(n_ * n_));
            for (int r = 0; r < n_; ++r)
                for (int q = 0; q < n_; ++q) c.M[static_cast<std::size_t>(r * n_ + q)] = t.quadratic(r, q);
            terms_.push_back(std::move(c));
        }
    }

    cdouble operator()(const double* z) const {
        cdouble s{0.0, 0.0};
        double u[PhaseGrid::max_axes * 4];
        for (const auto& t : terms_) {
            double ph = 0.0;
            for (int a = 0; a < n_; ++a) {
                u[a] = z[a] - t.center[static_cast<std::size_t>(a)];
                ph += t.phase[static_cast<std::size_t>(a)] * z[a];
            }
            cdouble q{0.0, 0.0};
            for (int r = 0; r < n_; ++r) {
                cdouble row{0.0, 0.0};
                for (int c = 0; c < n_; ++c) row += t.M[static_cast<std::size_t>(r * n_ + c)] * u[c];
                q += u[r] * row;
            }
            s += t.amplitude * std::exp(cdouble(-0.5 * q.real(), -0.5 * q.imag() + ph));
        }
        return s;
    }

private:
    struct Term {
        cdouble amplitude;
        std::vector<double> center, phase;
        std::vector<cdouble> M;
    };
    int n_;
    std::vector<Term> terms_;
};

struct GaussRule {
    std::vector<double> x, w; // on [-1, 1]
};

inline const GaussRule& gauss16() {
    static const GaussRule rule = [] {
        using G = boost::math::quadrature::gauss<double, 16>;
        GaussRule r;
        const auto& ab = G::abscissa();
        const auto& wt = G::weights();
        for (std::size_t i = 0; i < ab.size(); ++i) {
            r.x.push_back(-ab[i]);
            r.w.push_back(wt[i]);
            r.x.push_back(ab[i]);
            r.w.push_back(wt[i]);
        }
        return r;
    }();
    return rule;
}

struct MixtureScales {
    double radius = 0.0;       // |g^|^2 below 1e-30 of its peak scale beyond this radius
    double sqrt_lambda_max = 0.0;
};

inline MixtureScales mixture_scales(const GaussianMixtureState& s) {
    MixtureScales sc;
    for (const auto& t : s.terms()) {
        Eigen::SelfAdjointEigenSolver<RMat> es(RMat(t.quadratic.real()), Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        const double lmax = es.eigenvalues().maxCoeff();
        sc.radius = std::max(sc.radius, t.center.norm() + std::sqrt(75.0 / lmin));
        sc.sqrt_lambda_max = std::max(sc.sqrt_lambda_max, std::sqrt(lmax));
    }
    return sc;
}

// Spherical integral r^{n-1} \int_{S^{n-1}} |g^(r theta)|^2 dtheta for n in {2, 4}.
// The angular resolution follows the bandwidth of |g^|^2 on the sphere of radius r:
// the anisotropic part of each quadratic form and the linear terms it induces.
class SphericalShell {
public:
    explicit SphericalShell(const GaussianMixtureState& s) : eval_(s), n_(s.dims()) {
        if (n_ != 2 && n_ != 4)
            throw UnsupportedVariant("tail_mass: radial quadrature of mixtures supports d in {1, 2}");
        for (const auto& t : s.terms()) {
            const CMat iso = t.quadratic.trace() / static_cast<double>(n_) * CMat::Identity(n_, n_);
            const double aniso = (t.quadratic - iso).operatorNorm();
            const double full = t.quadratic.operatorNorm();
            aniso_ = std::max(aniso_, aniso);
            linear_ = std::max(linear_, full * t.center.norm() + t.phase.norm());
        }
    }

    std::size_t angular_nodes(double r) const {
        const double kappa = r * r * aniso_ + 2.0 * r * linear_;
        return 2 * static_cast<std::size_t>(std::ceil(kappa)) + 32;
    }

    double operator()(double r) const {
        const std::size_t k = angular_nodes(r);
        if (n_ == 2) {
            double s = 0.0;
            const double step = two_pi / static_cast<double>(k);
            for (std::size_t j = 0; j < k; ++j) {
                const double th = step * static_cast<double>(j);
                const double z[2] = {r * std::cos(th), r * std::sin(th)};
                s += std::norm(eval_(z));
            }
            return r * s * step;
        }
        // Hopf coordinates on S^3: (cos a cos p, cos a sin p, sin a cos q, sin a sin q),
        // surface element cos a sin a da dp dq, a in [0, pi/2].
        const auto& gl = gauss16();
        const std::size_t panels = std::max<std::size_t>(1, k / 32);
        const double astep = 0.5 * std::numbers::pi / static_cast<double>(panels);
        const double pstep = two_pi / static_cast<double>(k);
        std::vector<double> cp(k), sp(k);
        for (std::size_t i = 0; i < k; ++i) {
            cp[i] = std::cos(pstep * static_cast<double>(i));
            sp[i] = std::sin(pstep * static_cast<double>(i));
        }
        double s = 0.0;
        for (std::size_t pa = 0; pa < panels; ++pa) {
            const double a0 = astep * static_cast<double>(pa);
            for (std::size_t g = 0; g < gl.x.size(); ++g) {
                const double a = a0 + 0.5 * astep * (gl.x[g] + 1.0);
                const double ca = std::cos(a), sa = std::sin(a);
                double inner = 0.0;
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) {
                        const double z[4] = {r * ca * cp[i], r * ca * sp[i], r * sa * cp[j], r * sa * sp[j]};
                        inner += std::norm(eval_(z));
                    }
                s += 0.5 * astep * gl.w[g] * ca * sa * inner * pstep * pstep;
            }
        }
        return r * r * r * s;
    }

private:
    FastSpectralEvaluator eval_;
    int n_;
    double aniso_ = 0.0;
    double linear_ = 0.0;
};

} // namespace detail

/// Squared mass of the mixture outside B_N for each requested N (one radial sweep).
inline std::vector<double> tail_mass_profile(const GaussianMixtureState& s, const std::vector<double>& Ns) {
    for (double N : Ns)
        if (!(N >= 0.0)) throw InvalidArgument("tail_mass: N must be >= 0");
    const auto sc = detail::mixture_scales(s);
    const double R = sc.radius;
    const detail::SphericalShell shell(s);

    // Panel breakpoints: a uniform partition of [0, R] refined at every requested N.
    const double width = std::min(0.25, 1.0 / sc.sqrt_lambda_max);
    std::vector<double> cuts;
    const auto panels = static_cast<std::size_t>(std::ceil(R / width));
    for (std::size_t i = 0; i <= panels; ++i) cuts.push_back(R * static_cast<double>(i) / static_cast<double>(panels));
    for (double N : Ns)
        if (N < R) cuts.push_back(N);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto& gl = detail::gauss16();
    std::vector<double> panel_mass(cuts.size() - 1, 0.0);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p], b = cuts[p + 1];
        double acc = 0.0;
        for (std::size_t g = 0; g < gl.x.size(); ++g) acc += gl.w[g] * shell(a + 0.5 * (b - a) * (gl.x[g] + 1.0));
        panel_mass[p] = 0.5 * (b - a) * acc;
    }
    // Suffix sums, accumulated from the outside in.
    std::vector<double> outside(cuts.size(), 0.0);
    for (std::size_t p = panel_mass.size(); p-- > 0;) outside[p] = outside[p + 1] + panel_mass[p];

    std::vector<double> out;
    out.reserve(Ns.size());
    for (double N : Ns) {
        if (N >= R) {
            out.push_back(0.0);
            continue;
        }
        const auto it = std::lower_bound(cuts.begin(), cuts.end(), N);
        out.push_back(outside[static_cast<std::size_t>(it - cuts.begin())]);
    }
    return out;
}

inline double tail_mass(const GaussianMixtureState& s, double N) { return tail_mass_profile(s, {N}).front(); }

} // namespace kolmo
