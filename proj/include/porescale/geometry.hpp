#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace porescale {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);

enum class BoundaryTag : int { Inlet = 0, Outlet = 1, Symmetry = 2, Surface = 3 };

const char* to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& s);

/// Rectangular channel with half-disk obstacles attached alternately to the
/// bottom and top walls, centers spaced `obstacle_pitch` apart in x.
struct GeometryConfig {
    double length = 17.5;
    double height = 1.0;
    double obstacle_radius = 0.4;
    double obstacle_pitch = 1.5;
    int obstacle_count = 10;
    double first_center_x1 = 2.0;
    int boundary_arc_segments = 32;

    void validate() const; // throws ConfigError / OverlapError / OutOfDomainError
};

/// A circle supporting one obstacle arc; `wall_bottom` tells which wall the
/// half-disk is attached to.
struct ObstacleCircle {
    Vec2 center;
    double radius = 0.0;
    bool wall_bottom = true;
};

/// One polygonal boundary piece: directed segment with the fluid on its left.
/// `circle` indexes into PlanarDomain::circles for arc chords, -1 otherwise.
struct BoundarySegment {
    Vec2 a;
    Vec2 b;
    BoundaryTag tag = BoundaryTag::Symmetry;
    int circle = -1;
};

/// Closed polygonal outline of the fluid domain (single CCW loop; obstacle
/// notches are detours of the loop, so the domain stays simply connected).
struct PlanarDomain {
    GeometryConfig config;
    std::vector<BoundarySegment> segments;
    std::vector<ObstacleCircle> circles;

    double area() const; // polygon area (shoelace over the loop)
};

/// Builds the labeled outline. Obstacle k sits at
/// x1 = first_center_x1 + k * pitch, on the bottom wall for even k and the
/// top wall for odd k; each half-circle arc is polygonalized with
/// `boundary_arc_segments` chords whose endpoints lie on the exact circle.
PlanarDomain build_geometry(const GeometryConfig& config);

} // namespace porescale
