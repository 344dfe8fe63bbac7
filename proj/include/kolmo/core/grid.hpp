#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "kolmo/core/error.hpp"

namespace kolmo {

using cdouble = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Uniform periodic grid on the box [-L, L)^{2d} of phase space (x-axes first, then v-axes).
// The dual grid carries the FFT frequency set {k * pi / L : k = -M/2 .. M/2-1} on every axis.
class PhaseGrid {
public:
    static constexpr int max_axes = 4;

    PhaseGrid(int d, std::size_t points_per_axis, double half_width)
        : d_(d), points_(points_per_axis), half_width_(half_width) {
        if (d < 1 || d > 2)
            throw InvalidArgument("PhaseGrid: grid backend supports d in {1, 2}, got " + std::to_string(d));
        if (points_per_axis < 2 || points_per_axis % 2 != 0)
            throw InvalidArgument("PhaseGrid: points_per_axis must be even and >= 2");
        if (!(half_width > 0.0) || !std::isfinite(half_width))
            throw InvalidArgument("PhaseGrid: half_width must be positive");
        size_ = 1;
        for (int a = 0; a < axes(); ++a) size_ *= points_;
    }

    int d() const { return d_; }
    int axes() const { return 2 * d_; }
    std::size_t points_per_axis() const { return points_; }
    double half_width() const { return half_width_; }
    std::size_t size() const { return size_; }

    double spacing() const { return 2.0 * half_width_ / static_cast<double>(points_); }
    double dual_spacing() const { return std::numbers::pi / half_width_; }
    double nyquist() const { return 0.5 * static_cast<double>(points_) * dual_spacing(); }
    double cell_volume() const { return std::pow(spacing(), axes()); }
    double dual_cell_volume() const { return std::pow(dual_spacing(), axes()); }
    double box_volume() const { return std::pow(2.0 * half_width_, axes()); }

    double node(std::size_t j) const { return -half_width_ + static_cast<double>(j) * spacing(); }

    // FFT-ordered index -> signed frequency index in [-M/2, M/2).
    long signed_index(std::size_t k) const {
        const long m = static_cast<long>(points_);
        const long kk = static_cast<long>(k);
        return kk < m / 2 ? kk : kk - m;
    }
    double frequency(std::size_t k) const { return static_cast<double>(signed_index(k)) * dual_spacing(); }

    // Row-major stride of an axis (last axis fastest).
    std::size_t stride(int axis) const {
        std::size_t s = 1;
        for (int a = axis + 1; a < axes(); ++a) s *= points_;
        return s;
    }

    std::array<std::size_t, max_axes> unravel(std::size_t flat) const {
        std::array<std::size_t, max_axes> idx{};
        for (int a = axes() - 1; a >= 0; --a) {
            idx[a] = flat % points_;
            flat /= points_;
        }
        return idx;
    }

    std::array<double, max_axes> point(std::size_t flat) const {
        const auto idx = unravel(flat);
        std::array<double, max_axes> z{};
        for (int a = 0; a < axes(); ++a) z[a] = node(idx[a]);
        return z;
    }

    std::array<double, max_axes> dual_point(std::size_t flat) const {
        const auto idx = unravel(flat);
        std::array<double, max_axes> z{};
        for (int a = 0; a < axes(); ++a) z[a] = frequency(idx[a]);
        return z;
    }

    friend bool operator==(const PhaseGrid& a, const PhaseGrid& b) {
        return a.d_ == b.d_ && a.points_ == b.points_ && a.half_width_ == b.half_width_;
    }

private:
    int d_;
    std::size_t points_;
    double half_width_;
    std::size_t size_ = 0;
};

namespace detail {

template <class Tag>
class SampledField {
public:
    explicit SampledField(PhaseGrid grid) : grid_(grid), values_(grid.size(), cdouble{0.0, 0.0}) {}

    SampledField(PhaseGrid grid, std::vector<cdouble> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw DataError("field: value array length " + std::to_string(values_.size()) +
                            " does not match grid size " + std::to_string(grid_.size()));
        for (const auto& z : values_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw DataError("field: non-finite sample");
    }

    const PhaseGrid& grid() const { return grid_; }
    const std::vector<cdouble>& values() const { return values_; }
    std::vector<cdouble>& values() { return values_; }
    std::size_t size() const { return values_.size(); }
    cdouble operator[](std::size_t i) const { return values_[i]; }
    cdouble& operator[](std::size_t i) { return values_[i]; }

private:
    PhaseGrid grid_;
    std::vector<cdouble> values_;
};

struct PhaseTag {};
struct SpectralTag {};

} // namespace detail

/// Samples g(x, v) on the nodes of a PhaseGrid.
using PhaseField = detail::SampledField<detail::PhaseTag>;
/// Samples of the transform g^(xi, eta) on the dual grid, stored in FFT order.
using SpectralField = detail::SampledField<detail::SpectralTag>;

template <class F>
PhaseField sample_phase(const PhaseGrid& grid, F&& f) {
    std::vector<cdouble> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.point(i));
    return PhaseField(grid, std::move(v));
}

template <class F>
SpectralField sample_spectral(const PhaseGrid& grid, F&& f) {
    std::vector<cdouble> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.dual_point(i));
    return SpectralField(grid, std::move(v));
}

} // namespace kolmo
