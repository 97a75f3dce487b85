#pragma once

// Serialization of traced lines, profiles and reports. Floats go out with
// 17 significant digits so files round-trip and compare byte for byte.

#include "flowlines/oracles.hpp"
#include "flowlines/scenario.hpp"
#include "flowlines/tracer.hpp"

#include <json.hpp>

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>

namespace flowlines
{

namespace output_detail
{

inline std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string g6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace output_detail

/// CSV columns: line_id, origin_slit (1-based), point_index, x_m, y_m, Sx, Sy, density.
inline void write_trajectories_csv(std::ostream& os, std::span<const FlowLine> lines)
{
    using output_detail::g17;
    os << "line_id,origin_slit,point_index,x_m,y_m,Sx,Sy,density\n";
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        for (std::size_t j = 0; j < line.points.size(); ++j) {
            const auto& p = line.points[j];
            os << i << ',' << line.origin_slit + 1 << ',' << j << ',' << g17(p.x) << ',' << g17(p.y) << ','
               << g17(p.Sx) << ',' << g17(p.Sy) << ',' << g17(p.density) << '\n';
        }
    }
}

/// CSV columns: y_m, x_m, intensity, single_slit_sum.
inline void write_profiles_csv(std::ostream& os, std::span<const Profile> profiles)
{
    using output_detail::g17;
    os << "y_m,x_m,intensity,single_slit_sum\n";
    for (const auto& p : profiles) {
        for (std::size_t i = 0; i < p.x.size(); ++i) {
            os << g17(p.y) << ',' << g17(p.x[i]) << ',' << g17(p.intensity[i]) << ',' << g17(p.reference[i])
               << '\n';
        }
    }
}

inline nlohmann::ordered_json fringe_report_json(const FringeReport& r, double y)
{
    nlohmann::ordered_json j;
    j["y_m"] = y;
    j["visibility"] = r.visibility;
    j["fringe_spacing_m"] = r.fringe_spacing;
    j["phase_shift_m"] = r.phase_shift;
    j["reference"] = r.reference_normalized ? "single-slit-sum" : "none";
    j["window"] = {{"x_min_m", r.window_lo}, {"x_max_m", r.window_hi}};
    auto& ex = j["extrema"] = nlohmann::ordered_json::array();
    for (const auto& e : r.extrema) {
        ex.push_back({{"x_m", e.x}, {"value", e.value}, {"kind", e.kind == ExtremumKind::max ? "max" : "min"}});
    }
    return j;
}

inline nlohmann::ordered_json crossing_report_json(const CrossingReport& r)
{
    nlohmann::ordered_json j;
    j["counts"] = {{"slit1_crossed", r.slit1_crossed}, {"slit2_crossed", r.slit2_crossed}};
    auto& lines = j["lines"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.per_line.size(); ++i) {
        const auto& c = r.per_line[i];
        lines.push_back({{"line_id", i},
                         {"origin_slit", c.origin_slit + 1},
                         {"crossed_axis", c.crossed_axis},
                         {"final_side", std::string(to_string(c.final_side))}});
    }
    return j;
}

struct SvgStyle
{
    std::string title;
    double width = 900.0;
    double height = 600.0;
    double panel_width = 220.0;
    std::optional<std::string> timestamp; ///< written as a comment when set
};

/// Standalone SVG 1.1: one <path> per flow line coloured by origin slit,
/// propagation distance y to the right and x upward, optional intensity
/// panel on the right-hand side.
inline std::string emit_svg(std::span<const FlowLine> lines, const Profile* profile, const SvgStyle& style)
{
    using output_detail::g6;
    static const char* palette[] = {"#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad", "#d4800f"};

    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& l : lines) {
        for (const auto& p : l.points) {
            x_lo = std::min(x_lo, p.x);
            x_hi = std::max(x_hi, p.x);
            y_lo = std::min(y_lo, p.y);
            y_hi = std::max(y_hi, p.y);
        }
    }
    if (!(x_hi > x_lo)) {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if (!(y_hi > y_lo)) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    const bool panel = profile != nullptr && !profile->x.empty();
    const double margin = 60.0;
    const double plot_w = style.width - 2.0 * margin - (panel ? style.panel_width + margin / 2 : 0.0);
    const double plot_h = style.height - 2.0 * margin;
    auto px = [&](double y) { return margin + (y - y_lo) / (y_hi - y_lo) * plot_w; };
    auto py = [&](double x) { return margin + (x_hi - x) / (x_hi - x_lo) * plot_h; };

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (style.timestamp) {
        s << "<!-- generated " << *style.timestamp << " -->\n";
    }
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << g6(style.width) << "\" height=\""
      << g6(style.height) << "\" viewBox=\"0 0 " << g6(style.width) << ' ' << g6(style.height) << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << g6(style.width / 2) << "\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << style.title << "</text>\n";

    // axes
    s << "<g stroke=\"black\" stroke-width=\"1\">\n";
    s << "<line x1=\"" << g6(margin) << "\" y1=\"" << g6(margin + plot_h) << "\" x2=\"" << g6(margin + plot_w)
      << "\" y2=\"" << g6(margin + plot_h) << "\"/>\n";
    s << "<line x1=\"" << g6(margin) << "\" y1=\"" << g6(margin) << "\" x2=\"" << g6(margin) << "\" y2=\""
      << g6(margin + plot_h) << "\"/>\n";
    if (x_lo < 0.0 && x_hi > 0.0) {
        s << "<line x1=\"" << g6(margin) << "\" y1=\"" << g6(py(0.0)) << "\" x2=\"" << g6(margin + plot_w)
          << "\" y2=\"" << g6(py(0.0)) << "\" stroke-dasharray=\"4 4\" stroke=\"#888888\"/>\n";
    }
    s << "</g>\n";
    s << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    s << "<text x=\"" << g6(margin) << "\" y=\"" << g6(margin + plot_h + 16) << "\">" << g6(y_lo) << "</text>\n";
    s << "<text x=\"" << g6(margin + plot_w) << "\" y=\"" << g6(margin + plot_h + 16)
      << "\" text-anchor=\"end\">" << g6(y_hi) << "</text>\n";
    s << "<text x=\"" << g6(margin + plot_w / 2) << "\" y=\"" << g6(margin + plot_h + 32)
      << "\" text-anchor=\"middle\">y (m)</text>\n";
    s << "<text x=\"" << g6(margin - 6) << "\" y=\"" << g6(margin + 4) << "\" text-anchor=\"end\">" << g6(x_hi)
      << "</text>\n";
    s << "<text x=\"" << g6(margin - 6) << "\" y=\"" << g6(margin + plot_h) << "\" text-anchor=\"end\">"
      << g6(x_lo) << "</text>\n";
    s << "<text x=\"16\" y=\"" << g6(margin + plot_h / 2) << "\" transform=\"rotate(-90 16 "
      << g6(margin + plot_h / 2) << ")\" text-anchor=\"middle\">x (m)</text>\n";
    s << "</g>\n";

    s << "<g fill=\"none\" stroke-width=\"0.8\">\n";
    for (const auto& l : lines) {
        s << "<path stroke=\"" << palette[l.origin_slit % 5] << "\" d=\"";
        for (std::size_t i = 0; i < l.points.size(); ++i) {
            s << (i == 0 ? 'M' : 'L') << g6(px(l.points[i].y)) << ',' << g6(py(l.points[i].x));
            if (i + 1 < l.points.size()) {
                s << ' ';
            }
        }
        s << "\"/>\n";
    }
    s << "</g>\n";

    if (panel) {
        const double left = margin + plot_w + margin / 2;
        double vmax = 0.0;
        for (double v : profile->intensity) {
            vmax = std::max(vmax, v);
        }
        const double p_lo = profile->x.front();
        const double p_hi = profile->x.back();
        auto ppy = [&](double x) { return margin + (p_hi - x) / (p_hi - p_lo) * plot_h; };
        s << "<g>\n";
        s << "<rect x=\"" << g6(left) << "\" y=\"" << g6(margin) << "\" width=\"" << g6(style.panel_width)
          << "\" height=\"" << g6(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
        s << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.8\" points=\"";
        for (std::size_t i = 0; i < profile->x.size(); ++i) {
            const double v = vmax > 0.0 ? profile->intensity[i] / vmax : 0.0;
            s << g6(left + v * style.panel_width) << ',' << g6(ppy(profile->x[i]));
            if (i + 1 < profile->x.size()) {
                s << ' ';
            }
        }
        s << "\"/>\n";
        s << "<text x=\"" << g6(left + style.panel_width / 2) << "\" y=\"" << g6(margin + plot_h + 16)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">intensity at y = "
          << g6(profile->y) << " m</text>\n";
        s << "</g>\n";
    }
    s << "</svg>\n";
    return s.str();
}

} // namespace flowlines
