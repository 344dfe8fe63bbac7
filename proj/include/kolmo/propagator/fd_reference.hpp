#pragma once

// Independent finite-difference discretization of (d_t + v d_x - d_vv) g = 0 for d = 1:
// explicit first-order upwind transport in x, implicit (backward Euler) centered diffusion in v.
// First order in time and in x; stable under |v|max dt / h <= 1.

#include <sstream>

#include "kolmo/core/grid.hpp"

namespace kolmo {

namespace detail {

// Solves the periodic system (1 + 2r) y_j - r y_{j-1} - r y_{j+1} = b_j in place
// (cyclic Thomas algorithm with a Sherman-Morrison correction).
class PeriodicDiffusionSolver {
public:
    PeriodicDiffusionSolver(std::size_t n, double r) : n_(n), off_(-r), z_(n, 0.0) {
        const double diag = 1.0 + 2.0 * r;
        gamma_ = -diag;
        std::vector<double> b(n, diag);
        b[0] = diag - gamma_;
        b[n - 1] = diag - off_ * off_ / gamma_;
        cp_.resize(n);
        denom_.resize(n);
        denom_[0] = b[0];
        cp_[0] = off_ / denom_[0];
        for (std::size_t i = 1; i < n; ++i) {
            denom_[i] = b[i] - off_ * cp_[i - 1];
            cp_[i] = off_ / denom_[i];
        }
        z_[0] = gamma_;
        z_[n - 1] = off_;
        solve_plain(z_);
    }

    template <class T>
    void solve(std::vector<T>& y) const {
        solve_plain(y);
        const T fact = (y[0] + (off_ / gamma_) * y[n_ - 1]) / (1.0 + z_[0] + (off_ / gamma_) * z_[n_ - 1]);
        for (std::size_t i = 0; i < n_; ++i) y[i] -= fact * z_[i];
    }

private:
    template <class T>
    void solve_plain(std::vector<T>& y) const {
        y[0] = y[0] / denom_[0];
        for (std::size_t i = 1; i < n_; ++i) y[i] = (y[i] - off_ * y[i - 1]) / denom_[i];
        for (std::size_t i = n_ - 1; i-- > 0;) y[i] -= cp_[i] * y[i + 1];
    }

    std::size_t n_;
    double off_;
    double gamma_ = 0.0;
    std::vector<double> cp_, denom_, z_;
};

} // namespace detail

inline PhaseField fd_solve(const PhaseField& f, double t, int steps) {
    const auto& g = f.grid();
    if (g.d() != 1) throw InvalidArgument("fd_solve: reference discretization supports d = 1 only");
    if (!(t >= 0.0)) throw InvalidArgument("fd_solve: t must be >= 0");
    if (steps < 1) throw InvalidArgument("fd_solve: steps must be positive");
    if (t == 0.0) return f;
    const std::size_t M = g.points_per_axis();
    const double h = g.spacing();
    const double dt = t / steps;
    const double vmax = g.half_width();
    const double courant = vmax * dt / h;
    if (courant > 1.0) {
        std::ostringstream msg;
        msg << "fd_solve: CFL violation, |v|max dt / h = " << courant << " > 1 (need steps >= "
            << static_cast<long>(std::ceil(t * vmax / h)) << ")";
        throw GuardError(msg.str());
    }
    const detail::PeriodicDiffusionSolver solver(M, dt / (h * h));

    // Layout: index = ix * M + iv.
    std::vector<cdouble> cur = f.values(), next(cur.size());
    std::vector<cdouble> column(M);
    for (int s = 0; s < steps; ++s) {
        for (std::size_t ix = 0; ix < M; ++ix) {
            const std::size_t xm = (ix + M - 1) % M, xp = (ix + 1) % M;
            for (std::size_t iv = 0; iv < M; ++iv) {
                const double v = g.node(iv);
                const cdouble here = cur[ix * M + iv];
                const cdouble dx = v > 0.0 ? (here - cur[xm * M + iv]) / h : (cur[xp * M + iv] - here) / h;
                next[ix * M + iv] = here - dt * v * dx;
            }
        }
        for (std::size_t ix = 0; ix < M; ++ix) {
            for (std::size_t iv = 0; iv < M; ++iv) column[iv] = next[ix * M + iv];
            solver.solve(column);
            for (std::size_t iv = 0; iv < M; ++iv) cur[ix * M + iv] = column[iv];
        }
    }
    return PhaseField(g, std::move(cur));
}

} // namespace kolmo
