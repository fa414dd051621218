#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "porescale/mesh.hpp"
#include "porescale/stokes.hpp"

namespace porescale {

enum class IsothermKind { Henry, Langmuir };

/// Surface kinetics dm/dt = f(c, m) in dimensionless form:
///   Henry:    f = Da_a c - Da_d m
///   Langmuir: f = Da_a c (1 - m/M) - Da_d m
struct Isotherm {
    IsothermKind kind = IsothermKind::Henry;
    double da_a = 0.0;
    double da_d = 0.0;
    double capacity = 1.0; // M, Langmuir only

    void validate() const;
    static Isotherm henry(double da_a, double da_d);
    static Isotherm langmuir(double da_a, double da_d, double capacity);
};

/// Dimensional scales and the dimensionless numbers they induce.
struct Nondimensionalization {
    double length_scale = 1.0;        // l
    double inlet_speed = 1.0;         // u_bar
    double inlet_concentration = 1.0; // c_bar
    double diffusivity = 1.0;         // D
    double k_a = 0.0;
    double k_d = 0.0;
    double m_infty = 1.0;

    void validate() const;
    double peclet() const { return length_scale * inlet_speed / diffusivity; }
    double da_a() const { return k_a / inlet_speed; }
    double da_d() const { return k_d * length_scale / inlet_speed; }
    double capacity() const { return m_infty / (length_scale * inlet_concentration); }
    double m_scale() const { return length_scale * inlet_concentration; }
};

struct TransportParams {
    double pe = 10.0;
    Isotherm isotherm;
    double tau = 0.1;
    double t_end = 40.0;

    void validate() const;
    int n_steps() const; // t_end / tau, validated integral
};

/// Bulk concentration (P1 nodal) plus surface concentration on SURFACE
/// nodes, ordered as TransportOperators::surface_nodes.
struct TransportState {
    double t = 0.0;
    Eigen::VectorXd c;
    Eigen::VectorXd m;
};

struct BreakthroughCurve {
    std::vector<double> times;  // tau, 2*tau, ..., T
    std::vector<double> values; // c_out at each step
};

/// Assembled spatial operators: P1 mass matrix, the operator for
/// d(c,s) = -int c u.grad(s) + (1/Pe) int grad(c).grad(s)
///          + int_out (u.n) c s,
/// lumped surface mass, and boundary bookkeeping. The velocity enters only
/// here, so steppers never touch the flow field again.
struct TransportOperators {
    Eigen::SparseMatrix<double> mass;
    Eigen::SparseMatrix<double> d_op;
    Eigen::VectorXd surface_weight; // lumped surface mass per mesh vertex
    std::vector<int> surface_nodes; // sorted vertex ids with positive weight
    std::vector<int> inlet_nodes;   // sorted vertex ids on the inlet
    double pe = 0.0;
    double mesh_peclet = 0.0;
    double outlet_length = 0.0;
    double domain_area = 0.0;
    std::uint64_t mesh_checksum = 0;

    // Per-facet data for outlet averaging and balance fluxes; u.n is frozen
    // at the edge Gauss points.
    struct BoundaryFacet {
        int a, b;
        int tri_v[3];
        Vec2 grad_l[3];
        double length;
        Vec2 normal;
        double un_gauss[3];
    };
    std::vector<BoundaryFacet> inlet_facets;
    std::vector<BoundaryFacet> outlet_facets;
};

TransportOperators assemble_transport(const Mesh& mesh, const FlowField& flow, double pe);

/// One scalar Crank-Nicolson update of the Henry surface ODE at a node.
double henry_m_update(double m_n, double c_n, double c_np1, double tau, double da_a,
                      double da_d);
/// Same for Langmuir with the midpoint bulk value held fixed (exact for
/// clamped c; one Picard inner update otherwise).
double langmuir_m_update(double m_n, double c_mid, double tau, const Isotherm& iso);

/// Time integrator. Henry eliminates m analytically and performs a single
/// sparse solve per step; Langmuir iterates Picard on the midpoint product
/// until the combined update norm drops below 1e-10 (50 iterations max).
class CrankNicolsonStepper {
public:
    CrankNicolsonStepper(const TransportOperators& ops, const TransportParams& params,
                         double inlet_value = 1.0);

    TransportState initial_state() const;
    void step(TransportState& state) const;

    /// Influx the scheme injected through the inlet rows during the last
    /// step (discrete counterpart of the convective+diffusive inlet flux).
    double last_inlet_influx() const { return last_inlet_influx_; }
    /// Convective outflow through the outlet at the Crank-Nicolson midpoint.
    double last_outlet_outflow() const { return last_outlet_outflow_; }

private:
    Eigen::VectorXd solve_bulk(const Eigen::VectorXd& rhs_full) const;

    const TransportOperators& ops_;
    TransportParams params_;
    double inlet_value_;
    double alpha_ = 0.0, beta_ = 0.0; // Henry elimination coefficients
    Eigen::SparseMatrix<double> lhs_;
    Eigen::SparseMatrix<double> rhs_op_; // M/tau - D/2
    Eigen::VectorXd lift_;               // inlet column contributions of lhs
    std::vector<char> is_inlet_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
    mutable double last_inlet_influx_ = 0.0;
    mutable double last_outlet_outflow_ = 0.0;
};

/// Convenience single step used in tests; run_transport uses the stepper.
TransportState step_cn(const TransportState& state, const TransportOperators& ops,
                       const TransportParams& params);

double compute_outlet_avg(const Eigen::VectorXd& c, const TransportOperators& ops);

/// Global budget per step: accumulated bulk and surface mass against the
/// time-integrated inflow and outflow. The residual is exactly zero for a
/// conservative scheme up to linear-solver round-off, so it doubles as a
/// check of the surface-coupling sign convention.
struct BalanceRow {
    double t;
    double bulk_mass;
    double surface_mass;
    double inflow_integral;  // discrete inlet influx, integrated in time
    double outflow_integral; // convective outlet flux, integrated in time
    double residual;         // bulk + surface - inflow + outflow
};

struct TransportResult {
    BreakthroughCurve curve;
    std::vector<std::pair<double, Eigen::VectorXd>> snapshots;
    std::vector<BalanceRow> balance;
};

struct RunOptions {
    std::vector<double> snapshot_times;
    bool record_balance = false;
    double inlet_value = 1.0;
};

TransportResult run_transport(const TransportOperators& ops, const TransportParams& params,
                              const RunOptions& options = {});
TransportResult run_transport(const Mesh& mesh, const FlowField& flow,
                              const TransportParams& params, const RunOptions& options = {});

enum class SweepAxis { Pe, DaA, DaD, Capacity };

/// One breakthrough curve per value of the chosen axis; the flow field is
/// reused across all runs.
std::vector<BreakthroughCurve> sensitivity_sweep(const Mesh& mesh, const FlowField& flow,
                                                 const TransportParams& base, SweepAxis axis,
                                                 const std::vector<double>& values);

void write_scalar_field(const Eigen::VectorXd& c, double time, std::uint64_t mesh_checksum,
                        const std::string& path);
Eigen::VectorXd read_scalar_field(const Mesh& mesh, const std::string& path, double* time);

} // namespace porescale
