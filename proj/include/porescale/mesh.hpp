#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "porescale/geometry.hpp"

namespace porescale {

/// Boundary edge of the triangulation. Directed so the fluid triangle lies on
/// the left of a->b; `circle` indexes Mesh::circles for SURFACE facets.
struct Facet {
    int a = -1;
    int b = -1;
    BoundaryTag tag = BoundaryTag::Symmetry;
    int circle = -1;
};

/// Conforming triangulation of the fluid domain with tagged boundary facets.
/// Triangles are CCW (positive signed area).
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Facet> facets;
    std::vector<ObstacleCircle> circles;
    double h_target = 0.0;

    std::size_t n_vertices() const { return vertices.size(); }
    std::size_t n_triangles() const { return triangles.size(); }

    double triangle_area(std::size_t t) const;
    double total_area() const;
    /// Smallest interior angle over all triangles, degrees.
    double min_angle_deg() const;
    double max_edge_length() const;

    /// Throws FormatError / MeshQualityError if a structural invariant fails
    /// (orientation, conformity, facet coverage, surface-vertex projection).
    void validate() const;
};

/// Constrained Delaunay triangulation of the domain at characteristic edge
/// length h_target. Boundary chords longer than h_target are subdivided
/// (surface chords are re-projected onto their circle); interior vertices are
/// seeded on a hex lattice and Lloyd-smoothed. Throws MeshQualityError if the
/// result has a minimum angle below 15 degrees.
Mesh triangulate(const PlanarDomain& domain, double h_target);

/// Uniform red refinement: each triangle splits into 4; midpoints of SURFACE
/// facets are projected onto the exact circle; facet tags are inherited.
Mesh refine(const Mesh& mesh);

/// Coarse-to-fine ladder: triangulate at h_target, then refine `levels` times.
std::vector<Mesh> refinement_ladder(const PlanarDomain& domain, double h_target,
                                    int levels);

void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

/// FNV-1a checksum of the serialized mesh text, used to pair field files
/// with the mesh they were computed on.
std::uint64_t mesh_checksum(const Mesh& mesh);

} // namespace porescale
