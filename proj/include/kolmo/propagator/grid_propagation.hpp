#pragma once

#include <algorithm>
#include <sstream>

#include "kolmo/core/norms.hpp"
#include "kolmo/propagator/symbol.hpp"

namespace kolmo {

struct GridPropagationOptions {
    double boundary_tolerance = default_boundary_tolerance;
    // Damping-weighted fraction of spectral energy allowed to wrap past Nyquist under the eta shift.
    double aliasing_tolerance = 1e-16;
    bool check_output = true;
};

struct GridPropagationResult {
    PhaseField field;
    double input_boundary_fraction = 0.0;
    double output_boundary_fraction = 0.0;
    double aliasing_fraction = 0.0;
};

namespace detail {

// Energy of g^_0 that the shift eta -> eta + xi t would carry past the dual box, weighted by the
// smallest damping exp(-t^3 |xi|^2 / 6) that content can receive.
inline double wrapped_fraction(const SpectralField& G0, double t, double* worst_xi) {
    const auto& g = G0.grid();
    const int d = g.d();
    const double limit = g.nyquist() - g.dual_spacing();
    double wrapped = 0.0, total = 0.0;
    *worst_xi = 0.0;
    for (std::size_t i = 0; i < G0.size(); ++i) {
        const double e = std::norm(G0[i]);
        total += e;
        if (e == 0.0) continue;
        const auto z = g.dual_point(i);
        double xi2 = 0.0;
        bool wraps = false;
        for (int a = 0; a < d; ++a) {
            xi2 += z[a] * z[a];
            if (std::abs(z[d + a] - z[a] * t) > limit) wraps = true;
        }
        if (wraps) {
            const double w = e * std::exp(-t * t * t * xi2 / 6.0);
            wrapped += w;
            if (w > 0.0) *worst_xi = std::max(*worst_xi, std::sqrt(xi2));
        }
    }
    return total > 0.0 ? wrapped / total : 0.0;
}

} // namespace detail

/// Grid realization of g^(t, xi, eta) = g^_0(xi, eta + xi t) exp(-Q): transform in x, modulate by
/// exp(-i t xi.v) in the mixed (xi, v) representation (the eta shift, exact on the grid), transform
/// in v, apply exp(-t |eta + xi t/2|^2 - t^3 |xi|^2 / 12), transform back.
inline GridPropagationResult propagate_grid_report(const PhaseField& f, double t,
                                                   const GridPropagationOptions& opt = {}) {
    if (!(t >= 0.0)) throw InvalidArgument("propagate_grid: t must be >= 0");
    const auto& g = f.grid();
    const int d = g.d();
    GridPropagationResult res{f, boundary_energy_fraction(f), 0.0, 0.0};
    if (res.input_boundary_fraction > opt.boundary_tolerance) {
        std::ostringstream msg;
        msg << "propagate_grid: input boundary energy fraction " << res.input_boundary_fraction << " exceeds "
            << opt.boundary_tolerance;
        throw GuardError(msg.str());
    }
    if (t == 0.0) {
        res.output_boundary_fraction = res.input_boundary_fraction;
        return res;
    }

    double worst_xi = 0.0;
    res.aliasing_fraction = detail::wrapped_fraction(fourier_forward(f), t, &worst_xi);
    if (res.aliasing_fraction > opt.aliasing_tolerance) {
        std::ostringstream msg;
        msg << "propagate_grid: aliasing guard, shifted spectrum wraps past Nyquist " << g.nyquist()
            << " (weighted energy fraction " << res.aliasing_fraction << ", offending |xi| up to " << worst_xi << ")";
        throw GuardError(msg.str());
    }

    std::vector<cdouble> data = f.values();
    detail::transform_axes(data, g, detail::x_axes(g), true);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto idx = g.unravel(i);
        double phase = 0.0;
        for (int a = 0; a < d; ++a) phase += g.frequency(idx[a]) * g.node(idx[d + a]);
        data[i] *= std::polar(1.0, -t * phase);
    }
    detail::transform_axes(data, g, detail::v_axes(g), true);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto z = g.dual_point(i);
        data[i] *= std::exp(-symbol_exponent(t, std::span<const double>(z.data(), static_cast<std::size_t>(2 * d))));
    }
    detail::transform_axes(data, g, detail::all_axes(g), false);

    res.field = PhaseField(g, std::move(data));
    res.output_boundary_fraction = boundary_energy_fraction(res.field);
    if (opt.check_output && res.output_boundary_fraction > opt.boundary_tolerance) {
        std::ostringstream msg;
        msg << "propagate_grid: output boundary energy fraction " << res.output_boundary_fraction << " exceeds "
            << opt.boundary_tolerance << " (transport reached the box edge)";
        throw GuardError(msg.str());
    }
    return res;
}

inline PhaseField propagate_grid(const PhaseField& f, double t, const GridPropagationOptions& opt = {}) {
    return propagate_grid_report(f, t, opt).field;
}

} // namespace kolmo
