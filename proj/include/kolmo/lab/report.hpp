#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kolmo/core/error.hpp"

namespace kolmo::lab {

/// Shortest round-trip representation, so reruns print identical bytes.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : os_(path) {
        if (!os_) throw DataError("cannot write " + path.string());
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
        os_ << '\n';
    }

private:
    std::ofstream os_;
};

struct Series {
    std::string name;
    std::vector<double> x, y;
    bool lines = true;
};

/// Minimal static SVG chart: axes, tick labels at the extremes, one polyline or marker set per series.
inline void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                           const std::string& ylabel, const std::vector<Series>& series) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double W = 640, H = 420, l = 80, r = 20, t = 40, b = 60;
    auto px = [&](double x) { return l + (x - x0) / (x1 - x0) * (W - l - r); };
    auto py = [&](double y) { return H - b - (y - y0) / (y1 - y0) * (H - t - b); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
       << "<line x1=\"" << l << "\" y1=\"" << H - b << "\" x2=\"" << W - r << "\" y2=\"" << H - b << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l << "\" y2=\"" << H - b << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << (l + W - r) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel
       << "</text>\n"
       << "<text x=\"18\" y=\"" << (t + H - b) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
       << (t + H - b) / 2 << ")\">" << ylabel << "</text>\n";
    char buf[64];
    for (double v : {x0, x1}) {
        std::snprintf(buf, sizeof buf, "%.4g", v);
        os << "<text x=\"" << px(v) << "\" y=\"" << H - b + 18 << "\" text-anchor=\"middle\" font-size=\"11\">" << buf
           << "</text>\n";
    }
    for (double v : {y0, y1}) {
        std::snprintf(buf, sizeof buf, "%.4g", v);
        os << "<text x=\"" << l - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << buf
           << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* col = palette[k % 6];
        if (s.lines) {
            os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            os << "\"/>\n";
        }
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\" fill=\"" << col << "\"/>\n";
        os << "<text x=\"" << W - r - 4 << "\" y=\"" << t + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
           << col << "\">" << s.name << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace kolmo::lab
