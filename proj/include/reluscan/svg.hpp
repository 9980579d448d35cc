#pragma once

#include <string>
#include <vector>

#include "reluscan/enumerate.hpp"

namespace reluscan {

struct SvgStyle {
    double width_px = 720.0;
    bool fill_by_gradient = true; ///< hue from the direction of the output gradient
    double stroke_width_frac = 0.0012;
    /// Overlay points (slice coordinates), drawn as black dots.
    std::vector<Vec2> data_points;
};

/// Cell complex as an SVG document: one polygon per cell (1-D cells become
/// thin strips), cell boundaries stroked, optional gradient shading and data
/// point overlay.
std::string render_svg(const RegionCensus& census, const SvgStyle& style = {});

void save_svg(const RegionCensus& census, const std::string& path, const SvgStyle& style = {});

} // namespace reluscan
