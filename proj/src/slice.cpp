#include "reluscan/slice.hpp"

#include <cmath>
#include <stdexcept>

namespace reluscan {

namespace {

double vnorm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double vdot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

std::vector<double> AffineSlice::embed(Vec2 u) const {
    std::vector<double> x = origin;
    const double coeff[2] = {u.x, u.y};
    for (std::size_t k = 0; k < basis.size(); ++k)
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += coeff[k] * basis[k][i];
    return x;
}

Vec2 AffineSlice::project(std::span<const double> x) const {
    std::vector<double> rel(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) rel[i] = x[i] - origin[i];
    Vec2 u;
    u.x = vdot(rel, basis[0]);
    if (basis.size() > 1) u.y = vdot(rel, basis[1]);
    return u;
}

double AffineSlice::projection_residual(std::span<const double> x) const {
    Vec2 u = project(x);
    std::vector<double> back = embed(u);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - back[i];
        s += d * d;
    }
    return std::sqrt(s);
}

void AffineSlice::validate() const {
    if (basis.empty() || basis.size() > 2)
        throw std::invalid_argument("slice dimension must be 1 or 2");
    if (static_cast<int>(basis.size()) > ambient_dim())
        throw std::invalid_argument("slice dimension exceeds input dimension");
    for (std::size_t a = 0; a < basis.size(); ++a) {
        if (basis[a].size() != origin.size())
            throw std::invalid_argument("basis vector dimension mismatch");
        for (std::size_t b = a; b < basis.size(); ++b) {
            double want = a == b ? 1.0 : 0.0;
            if (std::abs(vdot(basis[a], basis[b]) - want) > 1e-10)
                throw std::invalid_argument("slice basis is not orthonormal");
        }
    }
}

AffineSlice AffineSlice::axis_plane() {
    return {{0.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}}};
}

AffineSlice AffineSlice::axis_line() {
    return {{0.0}, {{1.0}}};
}

namespace {

AffineSlice plane_from_span(std::vector<double> origin, std::span<const double> v1,
                            std::span<const double> v2) {
    const double n1 = vnorm(v1);
    if (n1 <= 0.0) throw std::invalid_argument("degenerate slice: zero spanning vector");
    std::vector<double> b0(v1.begin(), v1.end());
    for (double& x : b0) x /= n1;
    std::vector<double> b1(v2.begin(), v2.end());
    const double proj = vdot(b1, b0);
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] -= proj * b0[i];
    const double resid = vnorm(b1);
    // sin(angle) between the spans
    if (resid <= 1e-6 * vnorm(v2))
        throw std::invalid_argument("degenerate slice: spanning vectors are (near-)collinear");
    for (double& x : b1) x /= resid;
    AffineSlice s{std::move(origin), {std::move(b0), std::move(b1)}};
    s.validate();
    return s;
}

} // namespace

AffineSlice slice_through_points(std::span<const double> p1, std::span<const double> p2) {
    if (p1.size() != p2.size()) throw std::invalid_argument("point dimension mismatch");
    return plane_from_span(std::vector<double>(p1.size(), 0.0), p1, p2);
}

AffineSlice slice_through_points(std::span<const double> p0, std::span<const double> p1,
                                 std::span<const double> p2) {
    if (p0.size() != p1.size() || p0.size() != p2.size())
        throw std::invalid_argument("point dimension mismatch");
    std::vector<double> v1(p0.size()), v2(p0.size());
    for (std::size_t i = 0; i < p0.size(); ++i) {
        v1[i] = p1[i] - p0[i];
        v2[i] = p2[i] - p0[i];
    }
    return plane_from_span(std::vector<double>(p0.begin(), p0.end()), v1, v2);
}

AffineSlice line_through_points(std::span<const double> p) {
    const double n = vnorm(p);
    if (n <= 0.0) throw std::invalid_argument("degenerate slice: zero direction");
    std::vector<double> dir(p.begin(), p.end());
    for (double& x : dir) x /= n;
    AffineSlice s{std::vector<double>(p.size(), 0.0), {std::move(dir)}};
    s.validate();
    return s;
}

} // namespace reluscan
