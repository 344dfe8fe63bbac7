#pragma once

// Field snapshot container (version 1), all values little-endian:
//
//   offset  size  content
//   0       8     magic "KOLMOSNP"
//   8       4     u32 version (= 1)
//   12      4     u32 kind: 0 phase field, 1 spectral field (FFT order), 2 mask (0/1 in re)
//   16      4     u32 d
//   20      4     u32 points_per_axis
//   24      8     f64 half_width
//   32      8     u64 count (= points_per_axis^{2d})
//   40      16*count  (f64 re, f64 im) per node, row-major with x-axes first
//
// See docs/snapshot_format.md.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <variant>

#include "kolmo/core/norms.hpp"

namespace kolmo {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

enum class SnapshotKind : std::uint32_t { phase = 0, spectral = 1, mask = 2 };

using Snapshot = std::variant<PhaseField, SpectralField, GridMask>;

namespace detail {

inline constexpr char snapshot_magic[8] = {'K', 'O', 'L', 'M', 'O', 'S', 'N', 'P'};
inline constexpr std::uint32_t snapshot_version = 1;

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw DataError("snapshot: truncated file");
    return v;
}

inline void write_header(std::ostream& os, SnapshotKind kind, const PhaseGrid& g) {
    os.write(snapshot_magic, sizeof snapshot_magic);
    put<std::uint32_t>(os, snapshot_version);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(kind));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.d()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.points_per_axis()));
    put<double>(os, g.half_width());
    put<std::uint64_t>(os, static_cast<std::uint64_t>(g.size()));
}

inline void write_values(std::ostream& os, const std::vector<cdouble>& v) {
    for (const auto& z : v) {
        put<double>(os, z.real());
        put<double>(os, z.imag());
    }
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("snapshot: cannot open " + p.string() + " for writing");
    return os;
}

} // namespace detail

inline void write_snapshot(const std::filesystem::path& p, const PhaseField& f) {
    auto os = detail::open_out(p);
    detail::write_header(os, SnapshotKind::phase, f.grid());
    detail::write_values(os, f.values());
}

inline void write_snapshot(const std::filesystem::path& p, const SpectralField& f) {
    auto os = detail::open_out(p);
    detail::write_header(os, SnapshotKind::spectral, f.grid());
    detail::write_values(os, f.values());
}

inline void write_snapshot(const std::filesystem::path& p, const GridMask& m) {
    auto os = detail::open_out(p);
    detail::write_header(os, SnapshotKind::mask, m.grid);
    for (auto b : m.values) {
        detail::put<double>(os, b ? 1.0 : 0.0);
        detail::put<double>(os, 0.0);
    }
}

inline Snapshot read_snapshot(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw Error("snapshot: cannot open " + p.string());
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, detail::snapshot_magic, sizeof magic) != 0)
        throw DataError("snapshot: bad magic in " + p.string());
    const auto version = detail::get<std::uint32_t>(is);
    if (version != detail::snapshot_version)
        throw DataError("snapshot: unsupported version " + std::to_string(version));
    const auto kind = detail::get<std::uint32_t>(is);
    const auto d = detail::get<std::uint32_t>(is);
    const auto m = detail::get<std::uint32_t>(is);
    const auto L = detail::get<double>(is);
    const auto count = detail::get<std::uint64_t>(is);
    const PhaseGrid g(static_cast<int>(d), m, L);
    if (count != g.size()) throw DataError("snapshot: count does not match grid");
    std::vector<cdouble> v(count);
    for (auto& z : v) {
        const double re = detail::get<double>(is);
        const double im = detail::get<double>(is);
        z = {re, im};
    }
    switch (static_cast<SnapshotKind>(kind)) {
    case SnapshotKind::phase: return PhaseField(g, std::move(v));
    case SnapshotKind::spectral: return SpectralField(g, std::move(v));
    case SnapshotKind::mask: {
        GridMask mask{g, std::vector<std::uint8_t>(count)};
        for (std::size_t i = 0; i < count; ++i) mask.values[i] = v[i].real() != 0.0 ? 1 : 0;
        return mask;
    }
    }
    throw DataError("snapshot: unknown kind " + std::to_string(kind));
}

} // namespace kolmo
