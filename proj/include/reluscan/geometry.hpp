#pragma once

#include <cmath>
#include <vector>

namespace reluscan {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Vertex list, counter-clockwise for proper polygons.
using Polygon = std::vector<Vec2>;

/// Signed area (positive for counter-clockwise orientation).
double polygon_area(const Polygon& poly);

/// Area-weighted centroid; falls back to the vertex mean for degenerate polygons.
Vec2 polygon_centroid(const Polygon& poly);

/// True iff all cross products of consecutive edges are >= -tol (CCW convex).
bool is_convex_ccw(const Polygon& poly, double tol);

/// True iff p lies inside the convex CCW polygon, expanded outward by tol.
bool point_in_convex(const Polygon& poly, Vec2 p, double tol);

/// Keeps the part of a convex CCW polygon with g.u + c >= 0. Vertices within
/// `snap` of the line are kept on the boundary. Result is CCW (may be empty).
Polygon clip_half_plane(const Polygon& poly, Vec2 g, double c, double snap);

/// Radius of the largest inscribed disk, via binary search on erosion depth.
double polygon_inradius(const Polygon& poly);

Polygon box_polygon(double xmin, double ymin, double xmax, double ymax);

} // namespace reluscan
