#pragma once

// Continuous-transform conventions realized on the periodic grid:
//
//   forward  f^(zeta) = \int f(z) exp(-i z.zeta) dz
//   inverse  f(z)     = (2 pi)^{-2d} \int f^(zeta) exp(+i z.zeta) dzeta
//
// so that ||f^|| = (2 pi)^d ||f|| on phase space of dimension 2d. The paper-style
// unnormalized inversion \int f^ exp(i z.zeta) dzeta equals (2 pi)^{2d} * fourier_inverse.

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <vector>

#include "kolmo/core/grid.hpp"

namespace kolmo {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline unsigned all_axes(const PhaseGrid& g) { return (1u << g.axes()) - 1u; }
inline unsigned x_axes(const PhaseGrid& g) { return (1u << g.d()) - 1u; }
inline unsigned v_axes(const PhaseGrid& g) { return all_axes(g) & ~x_axes(g); }

// Unnormalized in-place DFT over the axes whose bit is set in `axis_mask`.
inline void dft_axes(std::vector<cdouble>& data, const PhaseGrid& g, unsigned axis_mask, int sign) {
    fftw_iodim dims[PhaseGrid::max_axes];
    fftw_iodim loops[PhaseGrid::max_axes];
    int rank = 0;
    int howmany = 0;
    for (int a = 0; a < g.axes(); ++a) {
        fftw_iodim io;
        io.n = static_cast<int>(g.points_per_axis());
        io.is = static_cast<int>(g.stride(a));
        io.os = io.is;
        if (axis_mask & (1u << a))
            dims[rank++] = io;
        else
            loops[howmany++] = io;
    }
    if (rank == 0) return;
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    PlanHandle plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan.reset(fftw_plan_guru_dft(rank, dims, howmany, loops, buf, buf, sign, FFTW_ESTIMATE));
    }
    if (!plan) throw Error("fftw: planning failed");
    fftw_execute(plan.get());
}

inline bool odd_parity(const PhaseGrid& g, std::size_t flat, unsigned axis_mask) {
    const auto idx = g.unravel(flat);
    std::size_t s = 0;
    for (int a = 0; a < g.axes(); ++a)
        if (axis_mask & (1u << a)) s += idx[a];
    return (s & 1u) != 0;
}

inline int popcount(unsigned m) {
    int c = 0;
    for (; m; m &= m - 1) ++c;
    return c;
}

// Continuous-convention transform over a subset of axes; forward carries h per axis and the
// box-origin phase (-1)^k, inverse carries (1 / 2L) per axis.
inline void transform_axes(std::vector<cdouble>& data, const PhaseGrid& g, unsigned axis_mask, bool forward) {
    const int count = popcount(axis_mask);
    if (count == 0) return;
    if (forward) {
        dft_axes(data, g, axis_mask, FFTW_FORWARD);
        const double scale = std::pow(g.spacing(), count);
        for (std::size_t i = 0; i < data.size(); ++i)
            data[i] *= odd_parity(g, i, axis_mask) ? -scale : scale;
    } else {
        for (std::size_t i = 0; i < data.size(); ++i)
            if (odd_parity(g, i, axis_mask)) data[i] = -data[i];
        dft_axes(data, g, axis_mask, FFTW_BACKWARD);
        const double scale = std::pow(0.5 / g.half_width(), count);
        for (auto& z : data) z *= scale;
    }
}

inline void require_finite(const std::vector<cdouble>& v, const char* who) {
    for (const auto& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw DataError(std::string(who) + ": non-finite sample");
}

} // namespace detail

inline SpectralField fourier_forward(const PhaseField& f) {
    detail::require_finite(f.values(), "fourier_forward");
    std::vector<cdouble> v = f.values();
    detail::transform_axes(v, f.grid(), detail::all_axes(f.grid()), true);
    return SpectralField(f.grid(), std::move(v));
}

inline PhaseField fourier_inverse(const SpectralField& F) {
    detail::require_finite(F.values(), "fourier_inverse");
    std::vector<cdouble> v = F.values();
    detail::transform_axes(v, F.grid(), detail::all_axes(F.grid()), false);
    return PhaseField(F.grid(), std::move(v));
}

} // namespace kolmo
