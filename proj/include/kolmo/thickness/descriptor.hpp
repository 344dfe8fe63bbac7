#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "kolmo/core/error.hpp"

namespace kolmo {

// Candidate observability sets in R^n. Every set is open: balls and boxes exclude their boundary.

struct FullSpace {
    int dims = 0; // 0: any dimension
};

/// {z : normal . z > offset}
struct HalfSpace {
    std::vector<double> normal;
    double offset = 0.0;
};

/// Union of open balls of radius `radius` around `centers + k * period`, k in Z^n.
struct PeriodicBalls {
    std::vector<double> period;
    std::vector<std::vector<double>> centers;
    double radius = 0.0;
};

/// Indicator on the nodes j * (period / shape) of one cell, extended periodically.
/// Each node stands for its Voronoi cell.
struct PeriodicMask {
    std::vector<double> period;
    std::vector<std::size_t> shape;
    std::vector<std::uint8_t> values; // row-major, first axis slowest

    double step(std::size_t a) const { return period[a] / static_cast<double>(shape[a]); }
};

struct Box {
    std::vector<double> lo, hi;
};

/// Union of open boxes, optionally extended with the given period.
struct UnionBoxes {
    std::vector<Box> boxes;
    bool periodic = false;
    std::vector<double> period;
};

using ThickSetDescriptor = std::variant<FullSpace, HalfSpace, PeriodicBalls, PeriodicMask, UnionBoxes>;

namespace detail {

template <class... F> struct overloaded : F... {
    using F::operator()...;
};
template <class... F> overloaded(F...) -> overloaded<F...>;

inline void require_positive(const std::vector<double>& v, const char* what) {
    if (v.empty()) throw InvalidArgument(std::string(what) + " must not be empty");
    for (double p : v)
        if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument(std::string(what) + " entries must be positive");
}

inline void require_dims(const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n) throw InvalidArgument(std::string(what) + " has the wrong dimension");
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be finite");
}

// Signed offset folded into [-p/2, p/2].
inline double wrap(double x, double p) { return x - p * std::round(x / p); }

} // namespace detail

/// Ambient dimension; 0 for a dimension-free FullSpace.
inline int set_dims(const ThickSetDescriptor& s) {
    return std::visit(detail::overloaded{
                          [](const FullSpace& f) { return f.dims; },
                          [](const HalfSpace& h) { return static_cast<int>(h.normal.size()); },
                          [](const PeriodicBalls& b) { return static_cast<int>(b.period.size()); },
                          [](const PeriodicMask& m) { return static_cast<int>(m.period.size()); },
                          [](const UnionBoxes& u) {
                              return u.boxes.empty() ? 0 : static_cast<int>(u.boxes.front().lo.size());
                          },
                      },
                      s);
}

inline void validate(const ThickSetDescriptor& s) {
    std::visit(detail::overloaded{
                   [](const FullSpace& f) {
                       if (f.dims < 0) throw InvalidArgument("FullSpace: dims must be >= 0");
                   },
                   [](const HalfSpace& h) {
                       double n2 = 0.0;
                       for (double x : h.normal) n2 += x * x;
                       if (h.normal.empty() || !(n2 > 0.0) || !std::isfinite(n2) || !std::isfinite(h.offset))
                           throw InvalidArgument("HalfSpace: normal must be a nonzero finite vector");
                   },
                   [](const PeriodicBalls& b) {
                       detail::require_positive(b.period, "PeriodicBalls.period");
                       if (!(b.radius > 0.0) || !std::isfinite(b.radius))
                           throw InvalidArgument("PeriodicBalls: radius must be positive");
                       if (b.centers.empty()) throw InvalidArgument("PeriodicBalls: at least one center required");
                       for (const auto& c : b.centers) detail::require_dims(c, b.period.size(), "PeriodicBalls.center");
                   },
                   [](const PeriodicMask& m) {
                       detail::require_positive(m.period, "PeriodicMask.period");
                       if (m.shape.size() != m.period.size())
                           throw InvalidArgument("PeriodicMask: shape and period differ in dimension");
                       std::size_t count = 1;
                       for (auto k : m.shape) {
                           if (k == 0) throw InvalidArgument("PeriodicMask: shape entries must be positive");
                           count *= k;
                       }
                       if (m.values.size() != count) throw InvalidArgument("PeriodicMask: values do not match shape");
                       for (auto v : m.values)
                           if (v > 1) throw InvalidArgument("PeriodicMask: values must be 0 or 1");
                   },
                   [](const UnionBoxes& u) {
                       if (u.boxes.empty()) throw InvalidArgument("UnionBoxes: at least one box required");
                       const auto n = u.boxes.front().lo.size();
                       if (n == 0) throw InvalidArgument("UnionBoxes: boxes must have a dimension");
                       for (const auto& b : u.boxes) {
                           detail::require_dims(b.lo, n, "UnionBoxes.lo");
                           detail::require_dims(b.hi, n, "UnionBoxes.hi");
                           for (std::size_t a = 0; a < n; ++a)
                               if (!(b.lo[a] < b.hi[a])) throw InvalidArgument("UnionBoxes: need lo < hi on every axis");
                       }
                       if (u.periodic) {
                           detail::require_positive(u.period, "UnionBoxes.period");
                           if (u.period.size() != n) throw InvalidArgument("UnionBoxes: period has the wrong dimension");
                       }
                   },
               },
               s);
}

/// Membership test for z in the set (open semantics; masks use nearest node).
inline bool contains(const ThickSetDescriptor& s, const double* z) {
    return std::visit(
        detail::overloaded{
            [](const FullSpace&) { return true; },
            [z](const HalfSpace& h) {
                double p = 0.0;
                for (std::size_t a = 0; a < h.normal.size(); ++a) p += h.normal[a] * z[a];
                return p > h.offset;
            },
            [z](const PeriodicBalls& b) {
                for (const auto& c : b.centers) {
                    double r2 = 0.0;
                    for (std::size_t a = 0; a < b.period.size(); ++a) {
                        const double w = detail::wrap(z[a] - c[a], b.period[a]);
                        r2 += w * w;
                    }
                    if (r2 < b.radius * b.radius) return true;
                }
                return false;
            },
            [z](const PeriodicMask& m) {
                std::size_t idx = 0;
                for (std::size_t a = 0; a < m.period.size(); ++a) {
                    const auto k = static_cast<long long>(m.shape[a]);
                    long long j = std::llround(z[a] / m.step(a)) % k;
                    if (j < 0) j += k;
                    idx = idx * m.shape[a] + static_cast<std::size_t>(j);
                }
                return m.values[idx] != 0;
            },
            [z](const UnionBoxes& u) {
                for (const auto& b : u.boxes) {
                    bool in = true;
                    for (std::size_t a = 0; a < b.lo.size() && in; ++a) {
                        double x = z[a];
                        if (u.periodic) {
                            // shift into the period window starting at lo
                            x = b.lo[a] + std::fmod(std::fmod(x - b.lo[a], u.period[a]) + u.period[a], u.period[a]);
                        }
                        in = x > b.lo[a] && x < b.hi[a];
                    }
                    if (in) return true;
                }
                return false;
            },
        },
        s);
}

/// Scale every length in the descriptor by `factor`.
inline ThickSetDescriptor dilate(const ThickSetDescriptor& s, double factor) {
    if (!(factor > 0.0)) throw InvalidArgument("dilate: factor must be positive");
    auto scale = [factor](std::vector<double> v) {
        for (auto& x : v) x *= factor;
        return v;
    };
    return std::visit(detail::overloaded{
                          [](const FullSpace& f) -> ThickSetDescriptor { return f; },
                          [&](const HalfSpace& h) -> ThickSetDescriptor { return HalfSpace{h.normal, h.offset * factor}; },
                          [&](const PeriodicBalls& b) -> ThickSetDescriptor {
                              PeriodicBalls out{scale(b.period), {}, b.radius * factor};
                              for (const auto& c : b.centers) out.centers.push_back(scale(c));
                              return out;
                          },
                          [&](const PeriodicMask& m) -> ThickSetDescriptor {
                              return PeriodicMask{scale(m.period), m.shape, m.values};
                          },
                          [&](const UnionBoxes& u) -> ThickSetDescriptor {
                              UnionBoxes out{{}, u.periodic, scale(u.period)};
                              for (const auto& b : u.boxes) out.boxes.push_back({scale(b.lo), scale(b.hi)});
                              return out;
                          },
                      },
                      s);
}

// ---- JSON ----------------------------------------------------------------------------------

namespace detail {

inline void only_keys(const nlohmann::json& j, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError("set descriptor must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError("set descriptor: unknown key '" + it.key() + "'");
    }
}

template <class T> T field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("set descriptor: missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("set descriptor: bad value for '") + key + "': " + e.what());
    }
}

} // namespace detail

inline nlohmann::json to_json(const ThickSetDescriptor& s) {
    return std::visit(
        detail::overloaded{
            [](const FullSpace& f) { return nlohmann::json{{"kind", "full_space"}, {"dims", f.dims}}; },
            [](const HalfSpace& h) {
                return nlohmann::json{{"kind", "half_space"}, {"normal", h.normal}, {"offset", h.offset}};
            },
            [](const PeriodicBalls& b) {
                return nlohmann::json{
                    {"kind", "periodic_balls"}, {"period", b.period}, {"centers", b.centers}, {"radius", b.radius}};
            },
            [](const PeriodicMask& m) {
                std::vector<int> v(m.values.begin(), m.values.end());
                return nlohmann::json{{"kind", "periodic_mask"}, {"period", m.period}, {"shape", m.shape}, {"values", v}};
            },
            [](const UnionBoxes& u) {
                nlohmann::json boxes = nlohmann::json::array();
                for (const auto& b : u.boxes) boxes.push_back({{"lo", b.lo}, {"hi", b.hi}});
                nlohmann::json j{{"kind", "union_boxes"}, {"boxes", boxes}, {"periodic", u.periodic}};
                if (u.periodic) j["period"] = u.period;
                return j;
            },
        },
        s);
}

inline ThickSetDescriptor set_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("set descriptor must be an object");
    const auto kind = detail::field<std::string>(j, "kind");
    ThickSetDescriptor s;
    if (kind == "full_space") {
        detail::only_keys(j, {"kind", "dims"});
        s = FullSpace{j.contains("dims") ? detail::field<int>(j, "dims") : 0};
    } else if (kind == "half_space") {
        detail::only_keys(j, {"kind", "normal", "offset"});
        s = HalfSpace{detail::field<std::vector<double>>(j, "normal"),
                      j.contains("offset") ? detail::field<double>(j, "offset") : 0.0};
    } else if (kind == "periodic_balls") {
        detail::only_keys(j, {"kind", "period", "centers", "radius"});
        s = PeriodicBalls{detail::field<std::vector<double>>(j, "period"),
                          detail::field<std::vector<std::vector<double>>>(j, "centers"),
                          detail::field<double>(j, "radius")};
    } else if (kind == "periodic_mask") {
        detail::only_keys(j, {"kind", "period", "shape", "values"});
        const auto v = detail::field<std::vector<int>>(j, "values");
        PeriodicMask m{detail::field<std::vector<double>>(j, "period"),
                       detail::field<std::vector<std::size_t>>(j, "shape"), {}};
        for (int x : v) {
            if (x != 0 && x != 1) throw ConfigError("periodic_mask: values must be 0 or 1");
            m.values.push_back(static_cast<std::uint8_t>(x));
        }
        s = m;
    } else if (kind == "union_boxes") {
        detail::only_keys(j, {"kind", "boxes", "periodic", "period"});
        UnionBoxes u;
        const auto boxes = detail::field<nlohmann::json>(j, "boxes");
        if (!boxes.is_array()) throw ConfigError("union_boxes: 'boxes' must be an array");
        for (const auto& b : boxes) {
            detail::only_keys(b, {"lo", "hi"});
            u.boxes.push_back({detail::field<std::vector<double>>(b, "lo"), detail::field<std::vector<double>>(b, "hi")});
        }
        u.periodic = j.contains("periodic") && detail::field<bool>(j, "periodic");
        if (j.contains("period")) u.period = detail::field<std::vector<double>>(j, "period");
        s = u;
    } else {
        throw ConfigError("set descriptor: unknown kind '" + kind + "'");
    }
    try {
        validate(s);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

} // namespace kolmo
