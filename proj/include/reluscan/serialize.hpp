#pragma once

#include <string>

#include <json.hpp>

#include "reluscan/enumerate.hpp"

namespace reluscan {

/// Census export: {window, activation_count, linear_count, discarded_slivers,
/// cells?: [{vertices, pattern, gradient, offset}]}. Per-cell gradient/offset
/// are the output's affine map in slice coordinates.
nlohmann::json census_to_json(const RegionCensus& census, bool include_cells = true);

void save_census_json(const RegionCensus& census, const std::string& path,
                      bool include_cells = true);

} // namespace reluscan
