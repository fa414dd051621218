#include "porescale/quadrature.hpp"

#include <cmath>

namespace porescale {

const std::array<TriQuadrature::Point, 6>& TriQuadrature::points() {
    static const std::array<Point, 6> pts = [] {
        const double a1 = 0.816847572980459, b1 = 0.091576213509771, w1 = 0.109951743655322;
        const double a2 = 0.108103018168070, b2 = 0.445948490915965, w2 = 0.223381589678011;
        return std::array<Point, 6>{{{a1, b1, b1, w1},
                                     {b1, a1, b1, w1},
                                     {b1, b1, a1, w1},
                                     {a2, b2, b2, w2},
                                     {b2, a2, b2, w2},
                                     {b2, b2, a2, w2}}};
    }();
    return pts;
}

const std::array<EdgeQuadrature::Point, 3>& EdgeQuadrature::points() {
    static const std::array<Point, 3> pts = [] {
        const double g = std::sqrt(3.0 / 5.0);
        return std::array<Point, 3>{{{0.5 * (1.0 - g), 5.0 / 18.0},
                                     {0.5, 8.0 / 18.0},
                                     {0.5 * (1.0 + g), 5.0 / 18.0}}};
    }();
    return pts;
}

} // namespace porescale
