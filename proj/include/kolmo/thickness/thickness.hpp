#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "kolmo/core/norms.hpp"
#include "kolmo/thickness/descriptor.hpp"

namespace kolmo {

struct ThicknessCounterexample {
    std::vector<double> y;
    double distance = 0.0; // from y to the nearest admissible center y'
};

struct ThicknessVerdict {
    bool thick = false;
    double delta = 0.0;
    double r = 0.0;
    double sampling_step = 0.0;
    double worst_distance = 0.0; // sup over sampled y of dist(y, admissible centers)
    std::size_t samples = 0;
    std::optional<ThicknessCounterexample> counterexample;
};

namespace detail {

inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double max_cell_samples = 2e8;

// dist(y, {y' : B(y', r) in O}) for a periodic set, or +inf everywhere when that region is empty.
using AdmissibleDistance = std::function<double(const double*)>;

inline AdmissibleDistance ball_distance(const PeriodicBalls& b, double r) {
    const double slack = b.radius - r;
    if (slack < 0.0) return {};
    // A ball of radius r sits inside one of the balls iff its center is within radius - r of that center.
    return [b, slack](const double* y) {
        double best = inf;
        for (const auto& c : b.centers) {
            double d2 = 0.0;
            for (std::size_t a = 0; a < b.period.size(); ++a) {
                const double w = wrap(y[a] - c[a], b.period[a]);
                d2 += w * w;
            }
            best = std::min(best, std::max(0.0, std::sqrt(d2) - slack));
        }
        return best;
    };
}

inline AdmissibleDistance box_distance(const UnionBoxes& u, double r) {
    std::vector<Box> shrunk;
    for (const auto& b : u.boxes) {
        Box s{b.lo, b.hi};
        bool ok = true;
        for (std::size_t a = 0; a < s.lo.size(); ++a) {
            s.lo[a] += r;
            s.hi[a] -= r;
            ok = ok && s.lo[a] <= s.hi[a];
        }
        if (ok) shrunk.push_back(std::move(s));
    }
    if (shrunk.empty()) return {};
    return [shrunk = std::move(shrunk), period = u.period](const double* y) {
        double best = inf;
        for (const auto& b : shrunk) {
            double d2 = 0.0;
            for (std::size_t a = 0; a < b.lo.size(); ++a) {
                const double mid = 0.5 * (b.lo[a] + b.hi[a]), half = 0.5 * (b.hi[a] - b.lo[a]);
                const double off = std::abs(wrap(y[a] - mid, period[a]));
                const double gap = std::max(0.0, off - half);
                d2 += gap * gap;
            }
            best = std::min(best, std::sqrt(d2));
        }
        return best;
    };
}

// Erosion: a node is an admissible center when every node within r plus half a cell diagonal is set,
// so the Voronoi cells of those nodes cover B(node, r).
inline std::vector<std::uint8_t> erode(const PeriodicMask& m, double r) {
    const std::size_t n = m.period.size();
    double diag2 = 0.0;
    for (std::size_t a = 0; a < n; ++a) diag2 += m.step(a) * m.step(a);
    const double reach = r + 0.5 * std::sqrt(diag2);

    std::vector<std::vector<long long>> offsets;
    std::vector<long long> lim(n);
    for (std::size_t a = 0; a < n; ++a) lim[a] = static_cast<long long>(std::ceil(reach / m.step(a)));
    std::vector<long long> o(n);
    for (std::size_t a = 0; a < n; ++a) o[a] = -lim[a];
    for (;;) {
        double d2 = 0.0;
        for (std::size_t a = 0; a < n; ++a) d2 += std::pow(static_cast<double>(o[a]) * m.step(a), 2);
        if (d2 <= reach * reach) offsets.push_back(o);
        std::size_t a = n;
        while (a-- > 0) {
            if (++o[a] <= lim[a]) break;
            o[a] = -lim[a];
        }
        if (a == static_cast<std::size_t>(-1)) break;
    }

    std::vector<std::uint8_t> out(m.values.size(), 0);
    std::vector<long long> idx(n);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        if (!m.values[i]) continue;
        std::size_t rem = i;
        for (std::size_t a = n; a-- > 0;) {
            idx[a] = static_cast<long long>(rem % m.shape[a]);
            rem /= m.shape[a];
        }
        bool ok = true;
        for (const auto& off : offsets) {
            std::size_t j = 0;
            for (std::size_t a = 0; a < n; ++a) {
                const auto k = static_cast<long long>(m.shape[a]);
                j = j * m.shape[a] + static_cast<std::size_t>(((idx[a] + off[a]) % k + k) % k);
            }
            if (!m.values[j]) {
                ok = false;
                break;
            }
        }
        out[i] = ok ? 1 : 0;
    }
    return out;
}

inline AdmissibleDistance mask_distance(const PeriodicMask& m, double r) {
    const auto admissible = erode(m, r);
    const std::size_t n = m.period.size();
    std::vector<double> nodes; // coordinates of admissible nodes, n per node
    for (std::size_t i = 0; i < admissible.size(); ++i) {
        if (!admissible[i]) continue;
        std::vector<double> z(n);
        std::size_t rem = i;
        for (std::size_t a = n; a-- > 0;) {
            z[a] = static_cast<double>(rem % m.shape[a]) * m.step(a);
            rem /= m.shape[a];
        }
        nodes.insert(nodes.end(), z.begin(), z.end());
    }
    if (nodes.empty()) return {};
    return [nodes = std::move(nodes), period = m.period, n](const double* y) {
        double best2 = inf;
        for (std::size_t p = 0; p < nodes.size(); p += n) {
            double d2 = 0.0;
            for (std::size_t a = 0; a < n && d2 < best2; ++a) {
                const double w = wrap(y[a] - nodes[p + a], period[a]);
                d2 += w * w;
            }
            best2 = std::min(best2, d2);
        }
        return std::sqrt(best2);
    };
}

struct CellScan {
    double worst = 0.0;
    std::vector<double> worst_y;
    std::size_t samples = 0;
};

// Sup of dist over the sample lattice j * step covering one period cell [0, period).
inline CellScan scan_cell(const std::vector<double>& period, double step, const AdmissibleDistance& dist) {
    const std::size_t n = period.size();
    std::vector<std::size_t> count(n);
    double total = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
        count[a] = static_cast<std::size_t>(std::ceil(period[a] / step - 1e-9));
        total *= static_cast<double>(count[a]);
    }
    if (total > max_cell_samples) throw InvalidArgument("thickness: sampling_step too fine for this cell");
    CellScan out;
    out.worst = -1.0;
    std::vector<std::size_t> j(n, 0);
    std::vector<double> y(n, 0.0);
    for (;;) {
        for (std::size_t a = 0; a < n; ++a) y[a] = static_cast<double>(j[a]) * step;
        const double d = dist(y.data());
        ++out.samples;
        if (d > out.worst) {
            out.worst = d;
            out.worst_y = y;
        }
        std::size_t a = n;
        while (a-- > 0) {
            if (++j[a] < count[a]) break;
            j[a] = 0;
        }
        if (a == static_cast<std::size_t>(-1)) break;
    }
    return out;
}

struct PeriodicView {
    std::vector<double> period;
    AdmissibleDistance dist; // empty: no admissible centers at all
};

inline PeriodicView periodic_view(const ThickSetDescriptor& s, double r) {
    if (const auto* b = std::get_if<PeriodicBalls>(&s)) return {b->period, ball_distance(*b, r)};
    if (const auto* m = std::get_if<PeriodicMask>(&s)) return {m->period, mask_distance(*m, r)};
    const auto& u = std::get<UnionBoxes>(s);
    if (!u.periodic)
        throw UnsupportedVariant("thickness: a non-periodic union of boxes cannot be quantified over R^n");
    return {u.period, box_distance(u, r)};
}

// A point 10 max(delta, 1) deep in the complement; its admissible distance is exact.
inline ThicknessCounterexample halfspace_witness(const HalfSpace& h, double delta, double r) {
    double n2 = 0.0;
    for (double x : h.normal) n2 += x * x;
    const double norm = std::sqrt(n2);
    const double depth = 10.0 * std::max(delta, 1.0);
    const double level = h.offset / norm - depth; // signed position along the unit normal
    ThicknessCounterexample c;
    for (double x : h.normal) c.y.push_back(level * x / norm);
    c.distance = depth + r;
    return c;
}

inline void require_params(double delta, double r, double step) {
    if (!(delta > 0.0) || !(r > 0.0) || !(step > 0.0))
        throw InvalidArgument("thickness: delta, r and sampling_step must be positive");
}

} // namespace detail

/// Decide the (delta, r) condition. Periodic sets are sampled over one cell; a thick verdict
/// certifies the sampled points, a non-thick one carries the offending point.
inline ThicknessVerdict check_thickness(const ThickSetDescriptor& s, double delta, double r, double sampling_step) {
    detail::require_params(delta, r, sampling_step);
    validate(s);
    ThicknessVerdict v{false, delta, r, sampling_step, 0.0, 0, std::nullopt};
    if (std::holds_alternative<FullSpace>(s)) {
        v.thick = true;
        return v;
    }
    if (const auto* h = std::get_if<HalfSpace>(&s)) {
        v.counterexample = detail::halfspace_witness(*h, delta, r);
        v.worst_distance = detail::inf;
        return v;
    }
    const auto view = detail::periodic_view(s, r);
    if (!view.dist) {
        v.worst_distance = detail::inf;
        v.counterexample = ThicknessCounterexample{std::vector<double>(view.period.size(), 0.0), detail::inf};
        return v;
    }
    const auto scan = detail::scan_cell(view.period, sampling_step, view.dist);
    v.samples = scan.samples;
    v.worst_distance = scan.worst;
    v.thick = scan.worst <= delta;
    if (!v.thick) v.counterexample = ThicknessCounterexample{scan.worst_y, scan.worst};
    return v;
}

/// Smallest delta for which the sampled condition holds at inner radius r.
inline double minimal_delta(const ThickSetDescriptor& s, double r, double sampling_step) {
    detail::require_params(1.0, r, sampling_step);
    validate(s);
    if (std::holds_alternative<FullSpace>(s)) return 0.0;
    if (std::holds_alternative<HalfSpace>(s)) return detail::inf;
    const auto view = detail::periodic_view(s, r);
    if (!view.dist) throw NotThick("minimal_delta: no ball of this radius fits in the set; not thick for any delta");
    return detail::scan_cell(view.period, sampling_step, view.dist).worst;
}

/// Indicator of the set on the phase nodes of g (2d axes, x first).
inline GridMask grid_mask(const ThickSetDescriptor& s, const PhaseGrid& g) {
    validate(s);
    const int n = 2 * g.d();
    const int sd = set_dims(s);
    if (sd != 0 && sd != n) throw InvalidArgument("grid_mask: set dimension does not match the phase grid");
    if (const auto* m = std::get_if<PeriodicMask>(&s)) {
        for (int a = 0; a < n; ++a) {
            const double step = m->step(static_cast<std::size_t>(a));
            const double cells = 2.0 * g.half_width() / m->period[static_cast<std::size_t>(a)];
            if (std::abs(step / g.spacing() - 1.0) > 1e-9 || std::abs(cells - std::round(cells)) > 1e-9)
                throw InvalidArgument("grid_mask: mask period or spacing incommensurate with the grid box");
        }
    }
    GridMask out{g, std::vector<std::uint8_t>(g.size(), 0)};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto z = g.point(i);
        out.values[i] = contains(s, z.data()) ? 1 : 0;
    }
    return out;
}

} // namespace kolmo
