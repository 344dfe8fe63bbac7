#pragma once

// Closed-form Gaussian mixtures in frequency variables zeta = (xi, eta) in R^{2d}:
//
//   g^(zeta) = sum_j a_j exp(-1/2 (zeta - m_j)^T M_j (zeta - m_j) + i b_j . zeta)
//
// with M_j complex symmetric and Re M_j positive definite. Every quantity the lab needs
// (L2 norms, pointwise values in both spaces, propagation) is exact for this family.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "kolmo/core/grid.hpp"

namespace kolmo {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

struct GaussianTerm {
    cdouble amplitude{1.0, 0.0};
    RVec center;    // m
    CMat quadratic; // M
    RVec phase;     // b

    // Canonical form of exp(-1/2 zeta^T M zeta + zeta . u + log_amplitude).
    static GaussianTerm from_polynomial(const CMat& M, const CVec& u, cdouble log_amplitude) {
        GaussianTerm t;
        const RMat re = M.real();
        t.center = re.ldlt().solve(u.real());
        t.phase = u.imag() - M.imag() * t.center;
        const CVec mc = t.center.cast<cdouble>();
        t.amplitude = std::exp(log_amplitude + 0.5 * (mc.transpose() * M * mc)(0, 0));
        t.quadratic = M;
        return t;
    }

    // Linear coefficient u = M m + i b of the expanded exponent.
    CVec linear() const { return quadratic * center.cast<cdouble>() + cdouble(0.0, 1.0) * phase.cast<cdouble>(); }
    // Constant -1/2 m^T M m of the expanded exponent.
    cdouble constant() const {
        const CVec mc = center.cast<cdouble>();
        return -0.5 * (mc.transpose() * quadratic * mc)(0, 0);
    }
};

namespace detail {

inline double smallest_eigenvalue(const RMat& S) {
    Eigen::SelfAdjointEigenSolver<RMat> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// det(P)^{1/2} on the branch continuous from real positive-definite matrices:
// P = A^{1/2} (I + i S) A^{1/2}, S = A^{-1/2} B A^{-1/2} real symmetric, so the square root
// is sqrt(det A) * prod_j sqrt(1 + i mu_j) with principal roots.
inline cdouble sqrt_det(const CMat& P) {
    const RMat A = 0.5 * (P.real() + P.real().transpose());
    const RMat B = 0.5 * (P.imag() + P.imag().transpose());
    Eigen::SelfAdjointEigenSolver<RMat> ea(A);
    const RVec lam = ea.eigenvalues();
    if (lam.minCoeff() <= 0.0) throw InvalidArgument("sqrt_det: real part is not positive definite");
    const RMat Ainvsqrt = ea.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() * ea.eigenvectors().transpose();
    cdouble r = std::sqrt(lam.prod());
    if (B.cwiseAbs().maxCoeff() > 0.0) {
        const RMat S = Ainvsqrt * B * Ainvsqrt;
        Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
        for (int j = 0; j < es.eigenvalues().size(); ++j) r *= std::sqrt(cdouble(1.0, es.eigenvalues()(j)));
    }
    return r;
}

// \int_{R^n} exp(-1/2 z^T P z + w . z + c) dz for complex symmetric P with Re P > 0.
inline cdouble gaussian_integral(const CMat& P, const CVec& w, cdouble c) {
    const auto n = static_cast<double>(P.rows());
    const CVec Pw = P.partialPivLu().solve(w);
    const cdouble quad = 0.5 * (w.transpose() * Pw)(0, 0);
    return std::pow(two_pi, 0.5 * n) / sqrt_det(P) * std::exp(quad + c);
}

inline bool same_shape(const GaussianTerm& a, const GaussianTerm& b) {
    return a.center == b.center && a.quadratic == b.quadratic && a.phase == b.phase;
}

} // namespace detail

class GaussianMixtureState {
public:
    GaussianMixtureState(int d, std::vector<GaussianTerm> terms) : d_(d), terms_(std::move(terms)) {
        if (d < 1) throw InvalidArgument("GaussianMixtureState: d must be >= 1");
        const int n = 2 * d;
        for (std::size_t j = 0; j < terms_.size(); ++j) {
            auto& t = terms_[j];
            if (t.center.size() != n || t.phase.size() != n || t.quadratic.rows() != n || t.quadratic.cols() != n)
                throw InvalidArgument("GaussianMixtureState: term " + std::to_string(j) + " has wrong dimensions");
            if (!t.quadratic.allFinite() || !t.center.allFinite() || !t.phase.allFinite() ||
                !std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag()))
                throw DataError("GaussianMixtureState: non-finite term parameters");
            if ((t.quadratic - t.quadratic.transpose()).cwiseAbs().maxCoeff() >
                1e-12 * (1.0 + t.quadratic.cwiseAbs().maxCoeff()))
                throw InvalidArgument("GaussianMixtureState: quadratic form is not symmetric");
            t.quadratic = 0.5 * (t.quadratic + t.quadratic.transpose()).eval();
            if (!(detail::smallest_eigenvalue(t.quadratic.real()) > 0.0))
                throw InvalidArgument("GaussianMixtureState: Re(M) of term " + std::to_string(j) +
                                      " is not positive definite");
        }
    }

    int d() const { return d_; }
    int dims() const { return 2 * d_; }
    const std::vector<GaussianTerm>& terms() const { return terms_; }

    /// g^(zeta).
    cdouble spectral_value(const double* zeta) const {
        const int n = dims();
        cdouble s{0.0, 0.0};
        for (const auto& t : terms_) {
            Eigen::Map<const RVec> z(zeta, n);
            const RVec u = z - t.center;
            const CVec uc = u.cast<cdouble>();
            const cdouble q = (uc.transpose() * t.quadratic * uc)(0, 0);
            s += t.amplitude * std::exp(-0.5 * q + cdouble(0.0, t.phase.dot(z)));
        }
        return s;
    }

private:
    int d_;
    std::vector<GaussianTerm> terms_;
};

/// Inverse-transformed mixture g(z), evaluated term by term in closed form:
/// a (2 pi)^{-n/2} det(M)^{-1/2} exp(-1/2 w^T M^{-1} w + i w . m), w = z + b.
class PhysicalEvaluator {
public:
    explicit PhysicalEvaluator(const GaussianMixtureState& s) : n_(s.dims()) {
        for (const auto& t : s.terms()) {
            Cached c;
            c.inverse = t.quadratic.inverse();
            c.prefactor = t.amplitude * std::pow(two_pi, -0.5 * n_) / detail::sqrt_det(t.quadratic);
            c.center = t.center;
            c.phase = t.phase;
            cached_.push_back(std::move(c));
        }
    }

    cdouble operator()(const double* z) const {
        cdouble s{0.0, 0.0};
        Eigen::Map<const RVec> zz(z, n_);
        for (const auto& c : cached_) {
            const RVec w = zz + c.phase;
            const CVec wc = w.cast<cdouble>();
            const cdouble q = (wc.transpose() * c.inverse * wc)(0, 0);
            s += c.prefactor * std::exp(-0.5 * q + cdouble(0.0, w.dot(c.center)));
        }
        return s;
    }

private:
    struct Cached {
        CMat inverse;
        cdouble prefactor;
        RVec center;
        RVec phase;
    };
    int n_;
    std::vector<Cached> cached_;
};

/// Squared L2 norm of g^ from pairwise closed-form Gaussian integrals.
/// Terms with identical (m, M, b) are merged first so exact cancellations give exactly zero.
inline double mixture_norm_sq(const GaussianMixtureState& s) {
    std::vector<GaussianTerm> merged;
    for (const auto& t : s.terms()) {
        bool found = false;
        for (auto& m : merged)
            if (detail::same_shape(m, t)) {
                m.amplitude += t.amplitude;
                found = true;
                break;
            }
        if (!found) merged.push_back(t);
    }
    std::erase_if(merged, [](const GaussianTerm& t) { return t.amplitude == cdouble{0.0, 0.0}; });

    double total = 0.0;
    for (std::size_t j = 0; j < merged.size(); ++j) {
        const auto& a = merged[j];
        const CVec ua = a.linear();
        const cdouble ca = a.constant();
        for (std::size_t k = 0; k < merged.size(); ++k) {
            const auto& b = merged[k];
            const CMat P = a.quadratic + b.quadratic.conjugate();
            const CVec w = ua + b.linear().conjugate();
            const cdouble c = ca + std::conj(b.constant());
            total += (a.amplitude * std::conj(b.amplitude) * detail::gaussian_integral(P, w, c)).real();
        }
    }
    return std::max(total, 0.0);
}

/// L2 norm of the represented frequency-space function g^.
inline double mixture_norm(const GaussianMixtureState& s) { return std::sqrt(mixture_norm_sq(s)); }

/// L2 norm of the physical-space function, ||g|| = (2 pi)^{-d} ||g^||.
inline double mixture_physical_norm(const GaussianMixtureState& s) {
    return mixture_norm(s) * std::pow(two_pi, -s.d());
}

/// Upper estimate of the fraction of ||g^||^2 lying outside the dual box [-K, K)^{2d}
/// (spectral = true) or of ||g||^2 outside [-L, L)^{2d} (spectral = false), from term parameters.
inline double mixture_energy_outside(const GaussianMixtureState& s, double half_width, bool spectral) {
    const int n = s.dims();
    double sum_root = 0.0;
    for (const auto& t : s.terms()) {
        // |term|^2 is a Gaussian with covariance (2 Re Q)^{-1} around c, with Q = M (spectral) or M^{-1}.
        const RMat Q = spectral ? RMat(t.quadratic.real()) : RMat(CMat(t.quadratic.inverse()).real());
        const RMat cov = (2.0 * Q).inverse();
        const RVec c = spectral ? RVec(t.center) : RVec(-t.phase);
        double frac = 0.0;
        for (int a = 0; a < n; ++a) {
            const double sd = std::sqrt(cov(a, a));
            frac += 0.5 * std::erfc((half_width - c(a)) / (std::sqrt(2.0) * sd));
            frac += 0.5 * std::erfc((half_width + c(a)) / (std::sqrt(2.0) * sd));
        }
        frac = std::min(frac, 1.0);
        // Energy of the single term.
        GaussianMixtureState single(s.d(), {t});
        sum_root += std::sqrt(frac * mixture_norm_sq(single));
    }
    const double total = mixture_norm_sq(s);
    if (total <= 0.0) return 0.0;
    return std::min(1.0, sum_root * sum_root / total);
}

inline SpectralField sample_mixture_spectral(const PhaseGrid& g, const GaussianMixtureState& s) {
    if (s.d() != g.d()) throw GridMismatch("sample_mixture_spectral: mixture and grid dimensions differ");
    std::vector<cdouble> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto z = g.dual_point(i);
        v[i] = s.spectral_value(z.data());
    }
    return SpectralField(g, std::move(v));
}

inline PhaseField sample_mixture_physical(const PhaseGrid& g, const GaussianMixtureState& s) {
    if (s.d() != g.d()) throw GridMismatch("sample_mixture_physical: mixture and grid dimensions differ");
    const PhysicalEvaluator eval(s);
    std::vector<cdouble> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto z = g.point(i);
        v[i] = eval(z.data());
    }
    return PhaseField(g, std::move(v));
}

} // namespace kolmo
