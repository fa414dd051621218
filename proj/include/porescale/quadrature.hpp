#pragma once

#include <array>

namespace porescale {

/// Degree-4 rule on the reference triangle (Dunavant, 6 points), weights
/// normalized to sum to 1; multiply by the element area. Exact for every
/// product appearing in the Taylor-Hood and P1 transport forms on affine
/// elements.
struct TriQuadrature {
    struct Point {
        double l0, l1, l2, w;
    };
    static constexpr int n = 6;
    static const std::array<Point, 6>& points();
};

/// 3-point Gauss rule on [0,1], weights summing to 1; multiply by edge
/// length. Exact through degree 5.
struct EdgeQuadrature {
    struct Point {
        double s, w;
    };
    static constexpr int n = 3;
    static const std::array<Point, 3>& points();
};

} // namespace porescale
