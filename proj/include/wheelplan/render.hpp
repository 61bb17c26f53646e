#pragma once

#include <string>
#include <vector>

#include "wheelplan/costmap.hpp"
#include "wheelplan/planners.hpp"

namespace wheelplan {

/// Costmap as a pixmap, `scale` pixels per cell, grid +x to the right and +y up.
/// Free is white, Occupied black, Unknown gray; the path is drawn in red with the goal in blue.
std::string render_ppm(const Costmap& map, const PlannedPath* path, int scale = 4,
                       const std::vector<std::string>& comments = {});

/// Same picture as SVG, cells as run-length rectangles and the path as a polyline.
std::string render_svg(const Costmap& map, const PlannedPath* path, int scale = 4,
                       const std::vector<std::string>& comments = {});

}  // namespace wheelplan
