#include "reluscan/serialize.hpp"

#include <fstream>

namespace reluscan {

nlohmann::json census_to_json(const RegionCensus& census, bool include_cells) {
    nlohmann::json j;
    nlohmann::json wverts = nlohmann::json::array();
    for (const Vec2& v : census.window.verts) wverts.push_back({v.x, v.y});
    j["window"] = {{"k", census.window.k}, {"vertices", std::move(wverts)}};
    j["activation_count"] = census.activation_count;
    if (census.linear_count)
        j["linear_count"] = *census.linear_count;
    else
        j["linear_count"] = nullptr;
    j["discarded_slivers"] = census.discarded_slivers;
    j["wall_time_seconds"] = census.wall_time_seconds;
    if (include_cells && !census.cells.empty()) {
        nlohmann::json cells = nlohmann::json::array();
        for (const Cell& c : census.cells) {
            nlohmann::json verts = nlohmann::json::array();
            for (const Vec2& v : c.vertices) verts.push_back({v.x, v.y});
            nlohmann::json pattern = nlohmann::json::array();
            for (std::int8_t s : c.pattern) pattern.push_back(static_cast<int>(s));
            nlohmann::json grad = nlohmann::json::array();
            nlohmann::json offset = nlohmann::json::array();
            for (const SplitLine& o : c.output_affine) {
                grad.push_back(census.window.k == 1
                                   ? nlohmann::json::array({o.gradient.x})
                                   : nlohmann::json::array({o.gradient.x, o.gradient.y}));
                offset.push_back(o.offset);
            }
            cells.push_back({{"vertices", std::move(verts)},
                             {"pattern", std::move(pattern)},
                             {"gradient", std::move(grad)},
                             {"offset", std::move(offset)}});
        }
        j["cells"] = std::move(cells);
    }
    return j;
}

void save_census_json(const RegionCensus& census, const std::string& path, bool include_cells) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << census_to_json(census, include_cells).dump(2) << "\n";
}

} // namespace reluscan
