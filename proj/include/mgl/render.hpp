#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mgl/matrix.hpp"

namespace mgl {

// Deterministic SVG emitters for the two figure kinds the benchmark needs:
// precision-matrix heatmaps and F1-versus-sweep curves. Text output only, no
// external dependencies; equal inputs yield byte-identical documents.

struct HeatmapSpec {
    Matrix matrix;
    std::size_t cell_px = 24;
    // Symmetric clamp for the color scale; when absent, the 99th percentile
    // of |entries| is used so a single large value cannot wash out the map.
    std::optional<double> clamp;
};

struct CurveSeries {
    std::string name;
    std::vector<double> y;
};

struct CurveSpec {
    std::vector<double> x;
    std::vector<CurveSeries> series;
    std::string x_label = "x";
    std::string y_label = "F1";
};

struct Rgb {
    int r, g, b;
};

// Diverging blue-white-red scale, odd-symmetric about zero: negative values
// map to the hue mirror of their positive counterpart.
inline Rgb heatmap_color(double value, double clamp) {
    double t = std::clamp(value / clamp, -1.0, 1.0);
    const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
    if (t >= 0.0) return {255, fade, fade};
    return {fade, fade, 255};
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

inline void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " must be finite");
}

}  // namespace detail

inline std::string render_heatmap(const HeatmapSpec& spec) {
    const Matrix& m = spec.matrix;
    if (m.rows() == 0 || m.cols() == 0) throw InvalidInput("empty matrix");
    if (spec.cell_px < 1) throw InvalidInput("cell size must be at least 1 px");
    for (double v : m.values()) detail::check_finite(v, "matrix entry");

    double clamp;
    if (spec.clamp) {
        clamp = *spec.clamp;
        if (!(clamp > 0.0)) throw InvalidInput("clamp must be positive");
    } else {
        std::vector<double> mags;
        mags.reserve(m.values().size());
        for (double v : m.values()) mags.push_back(std::abs(v));
        std::sort(mags.begin(), mags.end());
        const std::size_t idx =
            static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(mags.size()))) - 1;
        clamp = mags[std::min(idx, mags.size() - 1)];
        if (clamp == 0.0) clamp = mags.back();  // fall back to the max
        if (clamp == 0.0) clamp = 1.0;          // all-zero matrix
    }

    const std::size_t w = m.cols() * spec.cell_px;
    const std::size_t h = m.rows() * spec.cell_px;
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const Rgb c = heatmap_color(m(i, j), clamp);
            out << "<rect x=\"" << j * spec.cell_px << "\" y=\"" << i * spec.cell_px
                << "\" width=\"" << spec.cell_px << "\" height=\"" << spec.cell_px
                << "\" fill=\"rgb(" << c.r << "," << c.g << "," << c.b << ")\"/>\n";
        }
    out << "</svg>\n";
    return out.str();
}

inline std::string render_curves(const CurveSpec& spec) {
    if (spec.x.size() < 2) throw InvalidInput("need at least two x points");
    if (spec.series.empty()) throw InvalidInput("need at least one series");
    for (double v : spec.x) detail::check_finite(v, "x value");
    for (const CurveSeries& s : spec.series) {
        if (s.y.size() != spec.x.size())
            throw InvalidInput("series '" + s.name + "' length does not match x");
        for (double v : s.y) {
            detail::check_finite(v, "y value");
            if (v < 0.0 || v > 1.0) throw InvalidInput("y values must lie in [0, 1]");
        }
    }

    constexpr double left = 56.0, top = 24.0, plot_w = 480.0, plot_h = 360.0;
    constexpr double bottom_pad = 48.0, legend_w = 168.0;
    const double width = left + plot_w + legend_w;
    const double height = top + plot_h + bottom_pad;

    const double x_min = *std::min_element(spec.x.begin(), spec.x.end());
    const double x_max = *std::max_element(spec.x.begin(), spec.x.end());
    const double span = x_max > x_min ? x_max - x_min : 1.0;
    const auto px = [&](double x) { return left + (x - x_min) / span * plot_w; };
    const auto py = [&](double y) { return top + (1.0 - y) * plot_h; };

    static const char* palette[] = {"#2c7bb6", "#d7191c", "#1a9641", "#fdae61",
                                    "#7b3294", "#636363"};
    constexpr std::size_t palette_n = sizeof(palette) / sizeof(palette[0]);

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::svg_num(width)
        << "\" height=\"" << detail::svg_num(height) << "\" viewBox=\"0 0 "
        << detail::svg_num(width) << " " << detail::svg_num(height)
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";

    // Axes.
    out << "<line x1=\"" << detail::svg_num(left) << "\" y1=\"" << detail::svg_num(top)
        << "\" x2=\"" << detail::svg_num(left) << "\" y2=\"" << detail::svg_num(top + plot_h)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << detail::svg_num(left) << "\" y1=\"" << detail::svg_num(top + plot_h)
        << "\" x2=\"" << detail::svg_num(left + plot_w) << "\" y2=\""
        << detail::svg_num(top + plot_h) << "\" stroke=\"black\"/>\n";

    // Y ticks at 0, 0.25, ..., 1.
    for (int i = 0; i <= 4; ++i) {
        const double y = 0.25 * i;
        out << "<line x1=\"" << detail::svg_num(left - 4) << "\" y1=\"" << detail::svg_num(py(y))
            << "\" x2=\"" << detail::svg_num(left) << "\" y2=\"" << detail::svg_num(py(y))
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << detail::svg_num(left - 8) << "\" y=\""
            << detail::svg_num(py(y) + 4) << "\" text-anchor=\"end\">" << detail::tick_label(y)
            << "</text>\n";
    }

    // X ticks at the data points when few, else six evenly spaced values.
    std::vector<double> ticks;
    if (spec.x.size() <= 12) {
        ticks = spec.x;
        std::sort(ticks.begin(), ticks.end());
        ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    } else {
        for (int i = 0; i <= 5; ++i) ticks.push_back(x_min + (x_max - x_min) * i / 5.0);
    }
    for (double t : ticks) {
        out << "<line x1=\"" << detail::svg_num(px(t)) << "\" y1=\""
            << detail::svg_num(top + plot_h) << "\" x2=\"" << detail::svg_num(px(t))
            << "\" y2=\"" << detail::svg_num(top + plot_h + 4) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << detail::svg_num(px(t)) << "\" y=\""
            << detail::svg_num(top + plot_h + 18) << "\" text-anchor=\"middle\">"
            << detail::tick_label(t) << "</text>\n";
    }

    // Axis labels.
    out << "<text x=\"" << detail::svg_num(left + plot_w / 2) << "\" y=\""
        << detail::svg_num(height - 8) << "\" text-anchor=\"middle\">"
        << detail::xml_escape(spec.x_label) << "</text>\n";
    out << "<text x=\"14\" y=\"" << detail::svg_num(top + plot_h / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << detail::svg_num(top + plot_h / 2) << ")\">" << detail::xml_escape(spec.y_label)
        << "</text>\n";

    // Data polylines.
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[s % palette_n]
            << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < spec.x.size(); ++i) {
            if (i) out << ' ';
            out << detail::svg_num(px(spec.x[i])) << ',' << detail::svg_num(py(spec.series[s].y[i]));
        }
        out << "\"/>\n";
    }

    // Legend.
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        const double ly = top + 16.0 + 20.0 * static_cast<double>(s);
        out << "<line x1=\"" << detail::svg_num(left + plot_w + 12) << "\" y1=\""
            << detail::svg_num(ly) << "\" x2=\"" << detail::svg_num(left + plot_w + 36)
            << "\" y2=\"" << detail::svg_num(ly) << "\" stroke=\"" << palette[s % palette_n]
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << detail::svg_num(left + plot_w + 42) << "\" y=\""
            << detail::svg_num(ly + 4) << "\">" << detail::xml_escape(spec.series[s].name)
            << "</text>\n";
    }

    out << "</svg>\n";
    return out.str();
}

}  // namespace mgl
