#pragma once

#include <cmath>
#include <vector>

#include "kolmo/core/gaussian_mixture.hpp"
#include "kolmo/thickness/descriptor.hpp"

namespace kolmo {

/// Axis-aligned sampling box with midpoint nodes lo + (j + 1/2) step.
struct SampleBox {
    std::vector<double> lo, hi;
    double step = 0.02;

    std::vector<std::size_t> counts() const {
        std::vector<std::size_t> c;
        for (std::size_t a = 0; a < lo.size(); ++a)
            c.push_back(static_cast<std::size_t>(std::ceil((hi[a] - lo[a]) / step)));
        return c;
    }
};

/// Box holding the physical mass of every state to about e^{-sigmas^2} relative, sampled at `step`
/// (coarsened when the node count would exceed max_points).
inline SampleBox covering_box(const std::vector<GaussianMixtureState>& states, double sigmas = 9.0,
                              double step = 0.02, double max_points = 4e7) {
    if (states.empty()) throw InvalidArgument("covering_box: no states");
    const int n = states.front().dims();
    SampleBox box{std::vector<double>(n, std::numeric_limits<double>::infinity()),
                  std::vector<double>(n, -std::numeric_limits<double>::infinity()), step};
    for (const auto& s : states) {
        if (s.dims() != n) throw InvalidArgument("covering_box: states differ in dimension");
        for (const auto& t : s.terms()) {
            // |term|^2 ~ exp(-w^T Re(M^{-1}) w), w = z + b: covariance (2 Re M^{-1})^{-1}.
            const RMat cov = (2.0 * RMat(t.quadratic.inverse().real())).inverse();
            for (int a = 0; a < n; ++a) {
                const double sd = std::sqrt(cov(a, a));
                box.lo[static_cast<std::size_t>(a)] = std::min(box.lo[static_cast<std::size_t>(a)], -t.phase(a) - sigmas * sd);
                box.hi[static_cast<std::size_t>(a)] = std::max(box.hi[static_cast<std::size_t>(a)], -t.phase(a) + sigmas * sd);
            }
        }
    }
    double volume = 1.0;
    for (int a = 0; a < n; ++a) volume *= box.hi[static_cast<std::size_t>(a)] - box.lo[static_cast<std::size_t>(a)];
    if (volume / std::pow(step, n) > max_points) box.step = std::pow(volume / max_points, 1.0 / n);
    return box;
}

namespace detail {

// Closed-form physical evaluation with flat storage, for dense sampling loops.
class FastPhysicalEvaluator {
public:
    explicit FastPhysicalEvaluator(const GaussianMixtureState& s) : n_(s.dims()) {
        for (const auto& t : s.terms()) {
            Term c;
            const CMat inv = t.quadratic.inverse();
            c.prefactor = t.amplitude * std::pow(two_pi, -0.5 * n_) / sqrt_det(t.quadratic);
            for (int r = 0; r < n_; ++r) {
                c.center.push_back(t.center(r));
                c.phase.push_back(t.phase(r));
                for (int q = 0; q < n_; ++q) c.inverse.push_back(inv(r, q));
            }
            terms_.push_back(std::move(c));
        }
    }

    cdouble operator()(const double* z) const {
        cdouble s{0.0, 0.0};
        double w[8];
        for (const auto& t : terms_) {
            double lin = 0.0;
            for (int a = 0; a < n_; ++a) {
                w[a] = z[a] + t.phase[static_cast<std::size_t>(a)];
                lin += w[a] * t.center[static_cast<std::size_t>(a)];
            }
            cdouble q{0.0, 0.0};
            for (int r = 0; r < n_; ++r) {
                cdouble row{0.0, 0.0};
                for (int c = 0; c < n_; ++c) row += t.inverse[static_cast<std::size_t>(r * n_ + c)] * w[c];
                q += w[r] * row;
            }
            s += t.prefactor * std::exp(cdouble(-0.5 * q.real(), -0.5 * q.imag() + lin));
        }
        return s;
    }

private:
    struct Term {
        cdouble prefactor;
        std::vector<double> center, phase;
        std::vector<cdouble> inverse;
    };
    int n_;
    std::vector<Term> terms_;
};

} // namespace detail

/// ||g||_{L^2(omega)} for mixtures by midpoint quadrature on a fixed box; the indicator of omega
/// is evaluated once and reused across states (e.g. along a trajectory).
class RestrictedNormSampler {
public:
    RestrictedNormSampler(const ThickSetDescriptor& omega, SampleBox box) : box_(std::move(box)) {
        validate(omega);
        const int sd = set_dims(omega);
        n_ = static_cast<int>(box_.lo.size());
        if (n_ == 0 || n_ > 8) throw InvalidArgument("RestrictedNormSampler: unsupported dimension");
        if (sd != 0 && sd != n_) throw InvalidArgument("RestrictedNormSampler: set and box differ in dimension");
        counts_ = box_.counts();
        std::size_t total = 1;
        for (auto c : counts_) total *= c;
        std::vector<double> z(static_cast<std::size_t>(n_));
        for (std::size_t i = 0; i < total; ++i) {
            node(i, z.data());
            if (contains(omega, z.data())) inside_.push_back(i);
        }
        total_ = total;
    }

    double restricted(const GaussianMixtureState& s) const { return norm(s, true); }
    double full(const GaussianMixtureState& s) const { return norm(s, false); }
    double cell_volume() const { return std::pow(box_.step, n_); }
    const SampleBox& box() const { return box_; }
    double measure_fraction() const { return static_cast<double>(inside_.size()) / static_cast<double>(total_); }

private:
    void node(std::size_t flat, double* z) const {
        for (int a = n_; a-- > 0;) {
            const auto c = counts_[static_cast<std::size_t>(a)];
            z[a] = box_.lo[static_cast<std::size_t>(a)] + (static_cast<double>(flat % c) + 0.5) * box_.step;
            flat /= c;
        }
    }

    double norm(const GaussianMixtureState& s, bool only_inside) const {
        if (s.dims() != n_) throw InvalidArgument("RestrictedNormSampler: state dimension mismatch");
        const detail::FastPhysicalEvaluator f(s);
        double acc = 0.0, z[8];
        if (only_inside) {
            for (auto i : inside_) {
                node(i, z);
                acc += std::norm(f(z));
            }
        } else {
            for (std::size_t i = 0; i < total_; ++i) {
                node(i, z);
                acc += std::norm(f(z));
            }
        }
        return std::sqrt(acc * cell_volume());
    }

    SampleBox box_;
    int n_ = 0;
    std::vector<std::size_t> counts_;
    std::vector<std::size_t> inside_;
    std::size_t total_ = 0;
};

} // namespace kolmo
