#include "porescale/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "porescale/errors.hpp"

namespace porescale {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

const char* to_string(BoundaryTag tag) {
    switch (tag) {
    case BoundaryTag::Inlet: return "INLET";
    case BoundaryTag::Outlet: return "OUTLET";
    case BoundaryTag::Symmetry: return "SYMMETRY";
    case BoundaryTag::Surface: return "SURFACE";
    }
    return "?";
}

BoundaryTag boundary_tag_from_string(const std::string& s) {
    if (s == "INLET") return BoundaryTag::Inlet;
    if (s == "OUTLET") return BoundaryTag::Outlet;
    if (s == "SYMMETRY") return BoundaryTag::Symmetry;
    if (s == "SURFACE") return BoundaryTag::Surface;
    throw FormatError("unknown boundary tag: " + s);
}

void GeometryConfig::validate() const {
    if (length <= 0.0 || height <= 0.0)
        throw ConfigError("geometry: length and height must be positive");
    if (obstacle_count < 0)
        throw ConfigError("geometry: obstacle_count must be non-negative");
    if (obstacle_count > 0) {
        if (obstacle_radius <= 0.0)
            throw ConfigError("geometry: obstacle_radius must be positive");
        if (obstacle_radius >= height)
            throw OverlapError("geometry: obstacle reaches the opposite wall");
        if (obstacle_pitch <= 0.0 && obstacle_count > 1)
            throw ConfigError("geometry: obstacle_pitch must be positive");
        if (boundary_arc_segments < 4)
            throw ConfigError("geometry: boundary_arc_segments must be >= 4");
        // Consecutive obstacles sit on opposite walls, centers
        // (pitch, height) apart.
        if (obstacle_count > 1) {
            const double cc2 = obstacle_pitch * obstacle_pitch + height * height;
            const double d2 = 4.0 * obstacle_radius * obstacle_radius;
            if (cc2 <= d2)
                throw OverlapError("geometry: consecutive obstacles intersect");
            // Same-wall neighbours are 2*pitch apart.
            if (obstacle_count > 2 && 2.0 * obstacle_pitch <= 2.0 * obstacle_radius)
                throw OverlapError("geometry: same-wall obstacles intersect");
        }
        const double first = first_center_x1;
        const double last = first_center_x1 + (obstacle_count - 1) * obstacle_pitch;
        if (first - obstacle_radius < 0.0 || last + obstacle_radius > length)
            throw OutOfDomainError("geometry: obstacle extends past x1 in [0, length]");
    }
}

namespace {

// Appends the chords of a half-circle arc detour, keeping the fluid on the
// left of each directed chord. Bottom obstacles are walked left to right over
// the apex (angle pi -> 0); top obstacles right to left under the apex
// (angle 2*pi -> pi).
void append_arc(std::vector<BoundarySegment>& segs, const ObstacleCircle& c,
                int circle_id, int nseg, double height) {
    const double pi = std::numbers::pi;
    Vec2 prev{};
    for (int i = 0; i <= nseg; ++i) {
        const double s = static_cast<double>(i) / nseg;
        const double ang = c.wall_bottom ? pi * (1.0 - s) : 2.0 * pi - pi * s;
        Vec2 p{c.center.x + c.radius * std::cos(ang),
               c.center.y + c.radius * std::sin(ang)};
        // Pin the wall endpoints exactly onto the wall line.
        if (i == 0 || i == nseg) p.y = c.wall_bottom ? 0.0 : height;
        if (i > 0)
            segs.push_back({prev, p, BoundaryTag::Surface, circle_id});
        prev = p;
    }
}

} // namespace

double PlanarDomain::area() const {
    double twice = 0.0;
    for (const auto& s : segments)
        twice += cross(s.a, s.b);
    return 0.5 * twice;
}

PlanarDomain build_geometry(const GeometryConfig& config) {
    config.validate();

    PlanarDomain dom;
    dom.config = config;

    std::vector<ObstacleCircle> bottom, top;
    for (int k = 0; k < config.obstacle_count; ++k) {
        const double cx = config.first_center_x1 + k * config.obstacle_pitch;
        ObstacleCircle c;
        c.radius = config.obstacle_radius;
        c.wall_bottom = (k % 2 == 0);
        c.center = {cx, c.wall_bottom ? 0.0 : config.height};
        (c.wall_bottom ? bottom : top).push_back(c);
    }
    dom.circles = bottom;
    dom.circles.insert(dom.circles.end(), top.begin(), top.end());

    const double L = config.length;
    const double H = config.height;
    auto& segs = dom.segments;

    // Bottom wall, left to right, detouring over each bottom obstacle.
    double xw = 0.0;
    for (std::size_t i = 0; i < bottom.size(); ++i) {
        const auto& c = bottom[i];
        segs.push_back({{xw, 0.0}, {c.center.x - c.radius, 0.0}, BoundaryTag::Symmetry, -1});
        append_arc(segs, c, static_cast<int>(i), config.boundary_arc_segments, H);
        xw = c.center.x + c.radius;
    }
    segs.push_back({{xw, 0.0}, {L, 0.0}, BoundaryTag::Symmetry, -1});

    // Outlet, bottom to top.
    segs.push_back({{L, 0.0}, {L, H}, BoundaryTag::Outlet, -1});

    // Top wall, right to left, detouring under each top obstacle.
    xw = L;
    for (std::size_t i = top.size(); i-- > 0;) {
        const auto& c = top[i];
        segs.push_back({{xw, H}, {c.center.x + c.radius, H}, BoundaryTag::Symmetry, -1});
        append_arc(segs, c, static_cast<int>(bottom.size() + i), config.boundary_arc_segments, H);
        xw = c.center.x - c.radius;
    }
    segs.push_back({{xw, H}, {0.0, H}, BoundaryTag::Symmetry, -1});

    // Inlet, top to bottom.
    segs.push_back({{0.0, H}, {0.0, 0.0}, BoundaryTag::Inlet, -1});

    return dom;
}

} // namespace porescale
