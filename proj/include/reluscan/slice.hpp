#pragma once

#include <span>
#include <vector>

#include "reluscan/geometry.hpp"

namespace reluscan {

/// A 1-D or 2-D affine slice of input space. The embedding of slice
/// coordinates u is  origin + u.x * basis[0] (+ u.y * basis[1]).
struct AffineSlice {
    std::vector<double> origin;
    std::vector<std::vector<double>> basis; ///< k orthonormal vectors, k in {1,2}

    int dim() const { return static_cast<int>(basis.size()); }
    int ambient_dim() const { return static_cast<int>(origin.size()); }

    std::vector<double> embed(Vec2 u) const;

    /// Slice coordinates of the orthogonal projection of x onto the slice.
    Vec2 project(std::span<const double> x) const;

    /// Distance between x and its projection onto the slice.
    double projection_residual(std::span<const double> x) const;

    /// Throws std::invalid_argument unless the basis is orthonormal within 1e-10.
    void validate() const;

    /// The identity plane of a 2-D input space.
    static AffineSlice axis_plane();
    /// The coordinate axis of a 1-D input space.
    static AffineSlice axis_line();
};

/// Plane through the origin spanned by p1, p2 (Gram-Schmidt). Near-collinear
/// spans (angle <= 1e-6 rad) raise a degenerate-slice error.
AffineSlice slice_through_points(std::span<const double> p1, std::span<const double> p2);

/// Plane through three points p0, p1, p2 (origin = p0).
AffineSlice slice_through_points(std::span<const double> p0, std::span<const double> p1,
                                 std::span<const double> p2);

/// 1-D slice through the origin with direction p/|p|.
AffineSlice line_through_points(std::span<const double> p);

} // namespace reluscan
