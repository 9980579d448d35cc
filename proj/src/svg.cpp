#include "reluscan/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace reluscan {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string hsl_fill(double angle_rad) {
    int hue = static_cast<int>(std::fmod(angle_rad / (2.0 * 3.14159265358979) * 360.0 + 360.0, 360.0));
    char buf[48];
    std::snprintf(buf, sizeof(buf), "hsl(%d,62%%,72%%)", hue);
    return buf;
}

} // namespace

std::string render_svg(const RegionCensus& census, const SvgStyle& style) {
    double xmin = census.window.verts[0].x, xmax = xmin;
    double ymin = census.window.verts[0].y, ymax = ymin;
    for (const Vec2& v : census.window.verts) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    const bool one_d = census.window.k == 1;
    const double strip = one_d ? 0.06 * (xmax - xmin) : 0.0;
    if (one_d) {
        ymin = -strip / 2.0;
        ymax = strip / 2.0;
    }
    const double w = xmax - xmin, h = ymax - ymin;
    const double scale = style.width_px / w;
    const double height_px = h * scale;
    const double stroke = style.stroke_width_frac * style.width_px;

    // y axis flipped so slice coordinates read the usual way
    auto px = [&](Vec2 u) {
        return Vec2{(u.x - xmin) * scale, (ymax - u.y) * scale};
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(style.width_px)
        << "\" height=\"" << fmt(height_px) << "\" viewBox=\"0 0 " << fmt(style.width_px) << " "
        << fmt(height_px) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (const Cell& cell : census.cells) {
        Polygon poly = cell.vertices;
        if (one_d) {
            double a = cell.vertices[0].x, b = cell.vertices[1].x;
            poly = {{a, -strip / 2}, {b, -strip / 2}, {b, strip / 2}, {a, strip / 2}};
        }
        std::string fill = "none";
        if (style.fill_by_gradient && !cell.output_affine.empty()) {
            const Vec2 g = cell.output_affine[0].gradient;
            fill = norm(g) > 0.0 ? hsl_fill(std::atan2(g.y, g.x)) : std::string("hsl(0,0%,88%)");
        }
        out << "<polygon points=\"";
        for (std::size_t i = 0; i < poly.size(); ++i) {
            Vec2 q = px(poly[i]);
            out << (i ? " " : "") << fmt(q.x) << "," << fmt(q.y);
        }
        out << "\" fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"" << fmt(stroke)
            << "\"/>\n";
    }
    for (const Vec2& p : style.data_points) {
        Vec2 q = px(one_d ? Vec2{p.x, 0.0} : p);
        out << "<circle cx=\"" << fmt(q.x) << "\" cy=\"" << fmt(q.y) << "\" r=\""
            << fmt(0.006 * style.width_px) << "\" fill=\"black\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void save_svg(const RegionCensus& census, const std::string& path, const SvgStyle& style) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << render_svg(census, style);
}

} // namespace reluscan
