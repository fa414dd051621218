#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "porescale/fem.hpp"
#include "porescale/mesh.hpp"

namespace porescale {

/// Inlet speed is the prescribed normal speed (flow enters against the
/// outward normal); the outlet pressure datum enters the weak form through
/// the natural boundary term.
struct FlowBCs {
    double inlet_normal_speed = 1.0;
    double outlet_pressure = 0.0;

    void validate() const;
};

/// Taylor-Hood P2-P1 dof layout on a mesh: velocity components interleaved
/// at vertices and edge midpoints, pressure at vertices, appended last.
struct TaylorHoodSpace {
    explicit TaylorHoodSpace(const Mesh& mesh);

    EdgeTable edges;
    std::size_t n_vertices = 0;

    std::size_t n_vel_nodes() const { return n_vertices + edges.size(); }
    std::size_t n_velocity_dofs() const { return 2 * n_vel_nodes(); }
    std::size_t n_pressure_dofs() const { return n_vertices; }
    std::size_t n_dofs() const { return n_velocity_dofs() + n_pressure_dofs(); }

    int vel_dof(int node, int comp) const { return 2 * node + comp; }
    int pressure_dof(int vertex) const { return static_cast<int>(n_velocity_dofs()) + vertex; }
};

/// Assembled saddle-point system with Dirichlet rows eliminated symmetrically
/// (unit diagonal, prescribed value on the right-hand side).
struct StokesSystem {
    TaylorHoodSpace space;
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    std::vector<char> constrained; // per dof
};

struct FlowField {
    TaylorHoodSpace space;
    Eigen::VectorXd u; // 2*(n_vertices + n_edges), interleaved components
    Eigen::VectorXd p; // n_vertices
    double solver_residual = 0.0;
    std::uint64_t mesh_checksum = 0;

    /// Velocity at barycentric point (l0,l1,l2) of triangle t.
    Vec2 velocity_at(const Mesh& mesh, std::size_t t, double l0, double l1, double l2) const;
};

StokesSystem assemble_stokes(const Mesh& mesh, const FlowBCs& bcs);
FlowField solve_stokes(const Mesh& mesh, const FlowBCs& bcs);

/// Signed flux of the discrete velocity through all facets with `tag`,
/// positive outward (Simpson rule, exact for P2 on straight facets).
double flux_through(const Mesh& mesh, const FlowField& field, BoundaryTag tag);

/// Samples along the horizontal line x2 = y: velocity with the quadratic
/// basis, pressure with the linear one. Samples inside obstacles are marked
/// absent.
struct LineSamples {
    std::vector<double> x;
    std::vector<double> u1, u2, p;
    std::vector<char> present;
};
LineSamples sample_along_line(const Mesh& mesh, const FlowField& field, double y, int n_samples);

/// Scalar (P1) variant used for concentration fields.
struct ScalarLineSamples {
    std::vector<double> x;
    std::vector<double> value;
    std::vector<char> present;
};
ScalarLineSamples sample_scalar_along_line(const Mesh& mesh, const Eigen::VectorXd& nodal,
                                           double y, int n_samples);

void write_flow_field(const FlowField& field, const std::string& path);
FlowField read_flow_field(const Mesh& mesh, const std::string& path);

} // namespace porescale
