#pragma once

#include <array>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "porescale/mesh.hpp"

namespace porescale {

/// Affine geometry of one triangle: constant barycentric gradients and area.
struct ElementGeometry {
    std::array<Vec2, 3> grad_l;
    double area = 0.0;

    ElementGeometry(const Mesh& mesh, std::size_t t) {
        const auto& tr = mesh.triangles[t];
        const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
        const double d = cross(b - a, c - a); // 2*area, positive for CCW
        area = 0.5 * d;
        grad_l[0] = {(b.y - c.y) / d, (c.x - b.x) / d};
        grad_l[1] = {(c.y - a.y) / d, (a.x - c.x) / d};
        grad_l[2] = {(a.y - b.y) / d, (b.x - a.x) / d};
    }
};

/// Quadratic Lagrange basis on a triangle. Local nodes 0..2 are the
/// vertices, 3+j is the midpoint of the edge opposite vertex j.
namespace p2 {

inline std::array<double, 6> values(double l0, double l1, double l2) {
    return {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
            4.0 * l1 * l2,         4.0 * l2 * l0,         4.0 * l0 * l1};
}

inline std::array<Vec2, 6> gradients(double l0, double l1, double l2,
                                     const std::array<Vec2, 3>& g) {
    return {(4.0 * l0 - 1.0) * g[0],
            (4.0 * l1 - 1.0) * g[1],
            (4.0 * l2 - 1.0) * g[2],
            4.0 * (l2 * g[1] + l1 * g[2]),
            4.0 * (l0 * g[2] + l2 * g[0]),
            4.0 * (l1 * g[0] + l0 * g[1])};
}

} // namespace p2

/// Deterministic edge enumeration (first-seen order over triangles), shared
/// by the Taylor-Hood space and field serialization.
class EdgeTable {
public:
    explicit EdgeTable(const Mesh& mesh);

    std::size_t size() const { return edges_.size(); }
    const std::pair<int, int>& edge(std::size_t e) const { return edges_[e]; }
    /// Index of undirected edge (a, b); throws if absent.
    int index(int a, int b) const;
    /// P2 node ids (3 vertices then 3 opposite-edge midpoints) of triangle t.
    std::array<int, 6> p2_nodes(const Mesh& mesh, std::size_t t) const;

private:
    std::vector<std::pair<int, int>> edges_;
    std::map<std::pair<int, int>, int> index_;
};

/// Locates points in a mesh via a uniform bin grid; returns the containing
/// triangle and its barycentric coordinates.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh);
    std::optional<std::array<double, 3>> locate(Vec2 p, int& tri) const;

private:
    const Mesh& mesh_;
    double x0_, y0_, cell_;
    int nx_, ny_;
    std::vector<std::vector<int>> bins_;
};

} // namespace porescale
