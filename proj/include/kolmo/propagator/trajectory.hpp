#pragma once

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kolmo/core/snapshot.hpp"
#include "kolmo/propagator/grid_propagation.hpp"

namespace kolmo {

struct TrajectoryFrame {
    double time = 0.0;
    double norm = 0.0;
    cdouble zero_frequency{0.0, 0.0}; // g^(t, 0)
    double input_boundary_fraction = 0.0;
    double output_boundary_fraction = 0.0;
    double aliasing_fraction = 0.0;
    std::string snapshot; // file name relative to the trajectory directory
};

struct Trajectory {
    std::vector<TrajectoryFrame> frames;
    std::vector<PhaseField> fields;
};

namespace detail {

inline cdouble zero_frequency(const PhaseField& f) {
    cdouble s{0.0, 0.0};
    for (const auto& v : f.values()) s += v;
    return s * f.grid().cell_volume();
}

} // namespace detail

/// Each frame is propagated directly from f0, so errors do not compound across frames.
inline Trajectory propagate_trajectory(const PhaseField& f0, const std::vector<double>& times,
                                       const GridPropagationOptions& opt = {}) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0)) throw InvalidArgument("trajectory: times must be >= 0");
        if (i > 0 && times[i] <= times[i - 1]) throw InvalidArgument("trajectory: times must be strictly increasing");
    }
    Trajectory tr;
    for (std::size_t i = 0; i < times.size(); ++i) {
        auto r = propagate_grid_report(f0, times[i], opt);
        TrajectoryFrame fr;
        fr.time = times[i];
        fr.norm = l2_norm(r.field);
        fr.zero_frequency = detail::zero_frequency(r.field);
        fr.input_boundary_fraction = r.input_boundary_fraction;
        fr.output_boundary_fraction = r.output_boundary_fraction;
        fr.aliasing_fraction = r.aliasing_fraction;
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04zu.ksnp", i);
        fr.snapshot = name;
        tr.frames.push_back(fr);
        tr.fields.push_back(std::move(r.field));
    }
    return tr;
}

inline nlohmann::json trajectory_manifest(const Trajectory& tr, const GridPropagationOptions& opt) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : tr.frames)
        frames.push_back({{"time", f.time},
                          {"l2_norm", f.norm},
                          {"zero_frequency", {f.zero_frequency.real(), f.zero_frequency.imag()}},
                          {"input_boundary_fraction", f.input_boundary_fraction},
                          {"output_boundary_fraction", f.output_boundary_fraction},
                          {"aliasing_fraction", f.aliasing_fraction},
                          {"snapshot", f.snapshot}});
    nlohmann::json grid = nlohmann::json::object();
    if (!tr.fields.empty()) {
        const auto& g = tr.fields.front().grid();
        grid = {{"d", g.d()}, {"points_per_axis", g.points_per_axis()}, {"half_width", g.half_width()}};
    }
    return {{"grid", grid},
            {"guards",
             {{"boundary_tolerance", opt.boundary_tolerance},
              {"aliasing_tolerance", opt.aliasing_tolerance},
              {"check_output", opt.check_output}}},
            {"frames", frames}};
}

/// Writes frame_NNNN.ksnp snapshots and trajectory.json into `dir`.
inline Trajectory write_trajectory(const std::filesystem::path& dir, const PhaseField& f0,
                                   const std::vector<double>& times, const GridPropagationOptions& opt = {}) {
    auto tr = propagate_trajectory(f0, times, opt);
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < tr.frames.size(); ++i) write_snapshot(dir / tr.frames[i].snapshot, tr.fields[i]);
    std::ofstream os(dir / "trajectory.json");
    if (!os) throw DataError("trajectory: cannot write manifest in " + dir.string());
    os << trajectory_manifest(tr, opt).dump(2) << '\n';
    return tr;
}

} // namespace kolmo
