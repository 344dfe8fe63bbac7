#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "kolmo/core/fourier.hpp"

namespace kolmo {

/// 0/1 indicator sampled on the nodes of a grid (phase nodes, or dual nodes in FFT order).
struct GridMask {
    PhaseGrid grid;
    std::vector<std::uint8_t> values;

    static GridMask ones(const PhaseGrid& g) { return {g, std::vector<std::uint8_t>(g.size(), 1)}; }

    std::size_t count() const {
        return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
    }
    // Quadrature measure of the indicated set on phase nodes.
    double measure() const { return static_cast<double>(count()) * grid.cell_volume(); }
};

struct NormReport {
    double full_norm = 0.0;
    double restricted_norm = 0.0;
    double band_norm = 0.0;
    double tail_norm = 0.0;
};

namespace detail {

inline double sum_sq(const std::vector<cdouble>& v, const std::vector<std::uint8_t>* mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!mask || (*mask)[i]) s += std::norm(v[i]);
    return s;
}

inline void check_mask(const PhaseGrid& g, const GridMask& m) {
    if (!(m.grid == g) || m.values.size() != g.size()) throw GridMismatch("mask grid does not match field grid");
}

inline double radius(const std::array<double, PhaseGrid::max_axes>& z, int n) {
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += z[a] * z[a];
    return std::sqrt(r2);
}

} // namespace detail

inline double l2_norm(const PhaseField& f, const std::optional<GridMask>& mask = std::nullopt) {
    if (mask) detail::check_mask(f.grid(), *mask);
    return std::sqrt(f.grid().cell_volume() * detail::sum_sq(f.values(), mask ? &mask->values : nullptr));
}

inline double l2_norm(const SpectralField& F, const std::optional<GridMask>& mask = std::nullopt) {
    if (mask) detail::check_mask(F.grid(), *mask);
    return std::sqrt(F.grid().dual_cell_volume() * detail::sum_sq(F.values(), mask ? &mask->values : nullptr));
}

/// Indicator of the closed ball {|zeta| <= N} on the dual grid.
inline GridMask band_mask(const PhaseGrid& g, double N) {
    GridMask m{g, std::vector<std::uint8_t>(g.size(), 0)};
    for (std::size_t i = 0; i < g.size(); ++i) m.values[i] = detail::radius(g.dual_point(i), g.axes()) <= N ? 1 : 0;
    return m;
}

inline SpectralField band_project(const SpectralField& F, double N) {
    if (!(N >= 0.0)) throw InvalidArgument("band_project: N must be >= 0");
    SpectralField out = F;
    const auto m = band_mask(F.grid(), N);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!m.values[i]) out[i] = cdouble{0.0, 0.0};
    return out;
}

inline NormReport norm_report(const PhaseField& f, const GridMask& mask, double N) {
    const auto F = fourier_forward(f);
    auto band = band_mask(f.grid(), N);
    auto tail = band;
    for (auto& b : tail.values) b = b ? 0 : 1;
    return {l2_norm(f), l2_norm(f, mask), l2_norm(F, band), l2_norm(F, tail)};
}

/// Fraction of the squared norm carried by the outermost `layer` nodes of the box along any axis.
inline double boundary_energy_fraction(const PhaseField& f, std::size_t layer = 0) {
    const auto& g = f.grid();
    const std::size_t M = g.points_per_axis();
    if (layer == 0) layer = std::max<std::size_t>(1, M / 16);
    double edge = 0.0, total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double e = std::norm(f[i]);
        total += e;
        const auto idx = g.unravel(i);
        for (int a = 0; a < g.axes(); ++a)
            if (idx[a] < layer || idx[a] >= M - layer) {
                edge += e;
                break;
            }
    }
    return total > 0.0 ? edge / total : 0.0;
}

/// Same guard on the dual grid: energy within `layer` frequency nodes of the Nyquist edge.
inline double boundary_energy_fraction(const SpectralField& F, std::size_t layer = 0) {
    const auto& g = F.grid();
    const long half = static_cast<long>(g.points_per_axis() / 2);
    if (layer == 0) layer = std::max<std::size_t>(1, g.points_per_axis() / 16);
    double edge = 0.0, total = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) {
        const double e = std::norm(F[i]);
        total += e;
        const auto idx = g.unravel(i);
        for (int a = 0; a < g.axes(); ++a) {
            const long k = g.signed_index(idx[a]);
            if (k < -half + static_cast<long>(layer) || k >= half - static_cast<long>(layer)) {
                edge += e;
                break;
            }
        }
    }
    return total > 0.0 ? edge / total : 0.0;
}

inline constexpr double default_boundary_tolerance = 1e-8;

} // namespace kolmo
