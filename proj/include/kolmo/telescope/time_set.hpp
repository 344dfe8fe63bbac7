#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "kolmo/core/error.hpp"

namespace kolmo {

/// Finite union of disjoint open intervals inside (0, T).
class TimeSet {
public:
    using Interval = std::pair<double, double>;

    TimeSet(double T, std::vector<Interval> intervals) : T_(T), intervals_(std::move(intervals)) {
        if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("TimeSet: T must be positive");
        if (intervals_.empty()) throw InvalidArgument("TimeSet: E has no intervals");
        std::sort(intervals_.begin(), intervals_.end());
        for (std::size_t i = 0; i < intervals_.size(); ++i) {
            const auto [a, b] = intervals_[i];
            if (!(a >= 0.0) || !(b <= T) || !(a < b))
                throw InvalidArgument("TimeSet: intervals must satisfy 0 <= a < b <= T");
            if (i > 0 && a < intervals_[i - 1].second) throw InvalidArgument("TimeSet: intervals overlap");
            measure_ += b - a;
        }
    }

    double T() const { return T_; }
    const std::vector<Interval>& intervals() const { return intervals_; }
    double measure() const { return measure_; }

    /// |E intersected with (lo, hi)|
    double measure_in(double lo, double hi) const {
        double m = 0.0;
        for (const auto& [a, b] : intervals_) m += std::max(0.0, std::min(b, hi) - std::max(a, lo));
        return m;
    }

    /// Pieces of E inside (lo, hi).
    std::vector<Interval> clip(double lo, double hi) const {
        std::vector<Interval> out;
        for (const auto& [a, b] : intervals_) {
            const double x = std::max(a, lo), y = std::min(b, hi);
            if (x < y) out.emplace_back(x, y);
        }
        return out;
    }

    /// Component containing t in its interior, or nullptr.
    const Interval* component(double t) const {
        for (const auto& iv : intervals_)
            if (iv.first < t && t < iv.second) return &iv;
        return nullptr;
    }

private:
    double T_;
    std::vector<Interval> intervals_;
    double measure_ = 0.0;
};

/// Point 1% into the longest component (leftmost on ties); every interior point has density 1.
inline double find_density_point(const TimeSet& E) {
    // Lengths within roundoff of each other count as a tie.
    const TimeSet::Interval* best = nullptr;
    for (const auto& iv : E.intervals())
        if (!best || iv.second - iv.first > best->second - best->first + 1e-12 * E.T()) best = &iv;
    return best->first + 0.01 * (best->second - best->first);
}

} // namespace kolmo
