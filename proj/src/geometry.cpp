#include "reluscan/geometry.hpp"

#include <algorithm>
#include <limits>

namespace reluscan {

double polygon_area(const Polygon& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        acc += cross(a, b);
    }
    return 0.5 * acc;
}

Vec2 polygon_centroid(const Polygon& poly) {
    const std::size_t n = poly.size();
    if (n == 0) return {};
    double area = polygon_area(poly);
    Vec2 mean{0.0, 0.0};
    for (const Vec2& v : poly) mean = mean + v;
    mean = (1.0 / static_cast<double>(n)) * mean;
    if (std::abs(area) < 1e-300) return mean;
    Vec2 c{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        double w = cross(a, b);
        c.x += (a.x + b.x) * w;
        c.y += (a.y + b.y) * w;
    }
    c = (1.0 / (6.0 * area)) * c;
    return c;
}

bool is_convex_ccw(const Polygon& poly, double tol) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 e1 = poly[(i + 1) % n] - poly[i];
        Vec2 e2 = poly[(i + 2) % n] - poly[(i + 1) % n];
        if (cross(e1, e2) < -tol) return false;
    }
    return true;
}

bool point_in_convex(const Polygon& poly, Vec2 p, double tol) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a = poly[i];
        Vec2 b = poly[(i + 1) % n];
        Vec2 e = b - a;
        double len = norm(e);
        if (len < 1e-300) continue;
        // inward signed distance, scaled by edge length
        if (cross(e, p - a) < -tol * len) return false;
    }
    return true;
}

Polygon clip_half_plane(const Polygon& poly, Vec2 g, double c, double snap) {
    const std::size_t n = poly.size();
    Polygon out;
    if (n == 0) return out;
    out.reserve(n + 2);
    std::vector<double> val(n);
    for (std::size_t i = 0; i < n; ++i) val[i] = dot(g, poly[i]) + c;
    auto side = [&](double v) -> int {
        if (v > snap) return 1;
        if (v < -snap) return -1;
        return 0;
    };
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = (i + 1) % n;
        int si = side(val[i]);
        int sj = side(val[j]);
        if (si >= 0) out.push_back(poly[i]);
        if (si * sj < 0) {
            double t = val[i] / (val[i] - val[j]);
            out.push_back(poly[i] + t * (poly[j] - poly[i]));
        }
    }
    // drop consecutive near-duplicates
    if (out.size() > 2) {
        Polygon dedup;
        dedup.reserve(out.size());
        for (const Vec2& v : out) {
            if (dedup.empty() || norm(v - dedup.back()) > 1e-14 * (1.0 + norm(v))) dedup.push_back(v);
        }
        while (dedup.size() > 1 && norm(dedup.front() - dedup.back()) <= 1e-14 * (1.0 + norm(dedup.front())))
            dedup.pop_back();
        out.swap(dedup);
    }
    if (out.size() < 3) out.clear();
    return out;
}

double polygon_inradius(const Polygon& poly) {
    if (poly.size() < 3) return 0.0;
    double area = polygon_area(poly);
    if (area <= 0.0) return 0.0;
    double lo = 0.0;
    double xmin = poly[0].x, xmax = poly[0].x, ymin = poly[0].y, ymax = poly[0].y;
    for (const Vec2& v : poly) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    double hi = 0.5 * std::min(xmax - xmin, ymax - ymin);
    if (hi <= 0.0) return 0.0;
    auto erode_nonempty = [&](double r) {
        Polygon p = poly;
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n && !p.empty(); ++i) {
            Vec2 a = poly[i];
            Vec2 b = poly[(i + 1) % n];
            Vec2 e = b - a;
            double len = norm(e);
            if (len < 1e-300) continue;
            // inward normal of a CCW edge
            Vec2 in{-e.y / len, e.x / len};
            p = clip_half_plane(p, in, -dot(in, a) - r, 0.0);
        }
        return !p.empty() && polygon_area(p) > 0.0;
    };
    for (int it = 0; it < 60 && (hi - lo) > 1e-12 * (1.0 + hi); ++it) {
        double mid = 0.5 * (lo + hi);
        if (erode_nonempty(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

Polygon box_polygon(double xmin, double ymin, double xmax, double ymax) {
    return {{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}};
}

} // namespace reluscan
