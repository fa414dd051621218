#pragma once

#include <vector>

#include "porescale/geometry.hpp"

namespace porescale {

struct ContourPolyline {
    double level = 0.0;
    std::vector<Vec2> points;
};

/// Marching-squares isolines of a scalar sampled on a structured lattice.
/// values are row-major with the second coordinate fastest:
/// values[i * n2 + j] at (xs[i], ys[j]). Segments are merged into polylines.
std::vector<ContourPolyline> extract_isolines(const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              const std::vector<double>& values,
                                              const std::vector<double>& levels);

} // namespace porescale
