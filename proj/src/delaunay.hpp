#pragma once

#include <map>
#include <utility>
#include <vector>

#include "porescale/geometry.hpp"

namespace porescale::detail {

/// Incremental Bowyer-Watson triangulation with constrained-edge recovery by
/// Sloan flips. Points must lie strictly inside the bounding box given at
/// construction. Predicates run in long double with magnitude-scaled
/// epsilons; exact ties count as "not inside", which keeps cavity growth
/// consistent for cocircular inputs.
class DelaunayTriangulation {
public:
    DelaunayTriangulation(Vec2 lo, Vec2 hi);

    /// Inserts a point and returns its index (super-triangle corners are
    /// indices 0..2, first real point is 3).
    int insert(Vec2 p);

    /// Recovers the edge (a, b) as a constrained edge, flipping crossing
    /// edges; then re-legalizes unconstrained edges around it.
    void insert_constraint(int a, int b);

    /// Delaunay flips over all unconstrained edges until stable.
    void legalize_all();

    /// Triangles reachable from the super-triangle without crossing a
    /// constrained edge are exterior; everything else is interior.
    void classify_exterior();

    struct ExtractedTri {
        int v[3];
    };
    /// Interior triangles with vertices renumbered compactly.
    /// vertex_map[old_point_index] = new index or -1 if unused.
    void extract(std::vector<Vec2>& points, std::vector<ExtractedTri>& tris,
                 std::vector<int>& vertex_map) const;

    const Vec2& point(int i) const { return pts_[i]; }
    int n_points() const { return static_cast<int>(pts_.size()); }

private:
    struct Tri {
        int v[3];
        int adj[3]; // adj[j] faces the edge opposite v[j]
        bool alive = true;
        bool exterior = false;
    };

    int locate(Vec2 p, int hint) const;
    bool in_circumcircle(const Tri& t, Vec2 p) const;
    void flip(int t, int j);
    bool edge_constrained(int u, int v) const;
    int find_edge(int a, int b, int& jout) const; // triangle with directed edge (a,b)

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> vert2tri_;
    std::map<std::pair<int, int>, bool> constrained_;
    int last_tri_ = 0;
    double scale_ = 1.0;
};

} // namespace porescale::detail
