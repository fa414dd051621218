#include "porescale/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "porescale/errors.hpp"
#include "porescale/io_util.hpp"
#include "porescale/quadrature.hpp"

namespace porescale {

void Isotherm::validate() const {
    if (!(da_a >= 0.0) || !std::isfinite(da_a) || !(da_d >= 0.0) || !std::isfinite(da_d))
        throw ConfigError("isotherm: Damkohler numbers must be finite and non-negative");
    if (kind == IsothermKind::Langmuir && !(capacity > 0.0))
        throw ConfigError("isotherm: Langmuir capacity M must be positive");
}

Isotherm Isotherm::henry(double da_a, double da_d) {
    Isotherm iso{IsothermKind::Henry, da_a, da_d, 1.0};
    iso.validate();
    return iso;
}

Isotherm Isotherm::langmuir(double da_a, double da_d, double capacity) {
    Isotherm iso{IsothermKind::Langmuir, da_a, da_d, capacity};
    iso.validate();
    return iso;
}

void Nondimensionalization::validate() const {
    if (!(length_scale > 0.0) || !(inlet_speed > 0.0) || !(inlet_concentration > 0.0) ||
        !(diffusivity > 0.0))
        throw ConfigError("nondimensionalization: scales must be strictly positive");
}

void TransportParams::validate() const {
    isotherm.validate();
    if (!(pe > 0.0))
        throw ConfigError("transport: Pe must be positive");
    if (!(tau > 0.0) || !(t_end > 0.0) || tau > t_end)
        throw ConfigError("transport: need 0 < tau <= T_end");
    const double ratio = t_end / tau;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw ConfigError("transport: T_end/tau must be an integer number of steps");
}

int TransportParams::n_steps() const {
    validate();
    return static_cast<int>(std::llround(t_end / tau));
}

TransportOperators assemble_transport(const Mesh& mesh, const FlowField& flow, double pe) {
    if (!(pe > 0.0))
        throw ConfigError("transport: Pe must be positive");
    if (flow.mesh_checksum != mesh_checksum(mesh))
        throw MeshMismatchError("transport: flow field belongs to a different mesh");

    TransportOperators ops;
    ops.pe = pe;
    ops.mesh_checksum = flow.mesh_checksum;
    const int nv = static_cast<int>(mesh.n_vertices());

    std::vector<Eigen::Triplet<double>> tm, td;
    tm.reserve(mesh.n_triangles() * 9);
    td.reserve(mesh.n_triangles() * 9);
    const auto& quad = TriQuadrature::points();
    double mesh_pe = 0.0;
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeometry geo(mesh, t);
        const auto& tr = mesh.triangles[t];
        ops.domain_area += geo.area;
        double m_el[3][3] = {};
        double d_el[3][3] = {};
        double umax = 0.0;
        for (const auto& q : quad) {
            const double lam[3] = {q.l0, q.l1, q.l2};
            const double w = q.w * geo.area;
            const Vec2 u = flow.velocity_at(mesh, t, q.l0, q.l1, q.l2);
            umax = std::max(umax, norm(u));
            for (int i = 0; i < 3; ++i) {   // test s
                for (int j = 0; j < 3; ++j) { // trial c
                    m_el[i][j] += w * lam[i] * lam[j];
                    d_el[i][j] += w * (-lam[j] * dot(u, geo.grad_l[i]) +
                                       (1.0 / pe) * dot(geo.grad_l[j], geo.grad_l[i]));
                }
            }
        }
        double h_el = 0.0;
        for (int j = 0; j < 3; ++j)
            h_el = std::max(h_el, norm(mesh.vertices[tr[(j + 1) % 3]] - mesh.vertices[tr[j]]));
        mesh_pe = std::max(mesh_pe, umax * h_el * pe / 2.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                tm.emplace_back(tr[i], tr[j], m_el[i][j]);
                td.emplace_back(tr[i], tr[j], d_el[i][j]);
            }
    }
    ops.mesh_peclet = mesh_pe;
    if (mesh_pe > 2.0)
        std::fprintf(stderr,
                     "porescale: warning: mesh Peclet %.3g exceeds 2, plain Galerkin "
                     "convection may oscillate\n",
                     mesh_pe);

    // Boundary bookkeeping. Directed facet (a,b) has its fluid triangle on
    // the left; find it once for gradient evaluation.
    std::map<std::pair<int, int>, int> directed_tri;
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        for (int j = 0; j < 3; ++j)
            directed_tri[{tr[j], tr[(j + 1) % 3]}] = static_cast<int>(t);
    }
    const auto& equad = EdgeQuadrature::points();
    auto make_bfacet = [&](const Facet& f) {
        TransportOperators::BoundaryFacet bf{};
        bf.a = f.a;
        bf.b = f.b;
        const auto it = directed_tri.find({f.a, f.b});
        if (it == directed_tri.end())
            throw FormatError("transport: facet has no adjacent triangle");
        const int t = it->second;
        const ElementGeometry geo(mesh, t);
        for (int j = 0; j < 3; ++j) {
            bf.tri_v[j] = mesh.triangles[t][j];
            bf.grad_l[j] = geo.grad_l[j];
        }
        const Vec2 d = mesh.vertices[f.b] - mesh.vertices[f.a];
        bf.length = norm(d);
        bf.normal = {d.y / bf.length, -d.x / bf.length};
        // u at the edge Gauss points via barycentric coordinates of the
        // adjacent triangle.
        int ia = -1, ib = -1;
        for (int j = 0; j < 3; ++j) {
            if (mesh.triangles[t][j] == f.a) ia = j;
            if (mesh.triangles[t][j] == f.b) ib = j;
        }
        for (int q = 0; q < EdgeQuadrature::n; ++q) {
            double lam[3] = {0.0, 0.0, 0.0};
            lam[ia] = 1.0 - equad[q].s;
            lam[ib] = equad[q].s;
            const Vec2 u = flow.velocity_at(mesh, t, lam[0], lam[1], lam[2]);
            bf.un_gauss[q] = dot(u, bf.normal);
        }
        return bf;
    };

    std::set<int> surface_set, inlet_set;
    ops.surface_weight = Eigen::VectorXd::Zero(nv);
    for (const auto& f : mesh.facets) {
        switch (f.tag) {
        case BoundaryTag::Surface: {
            const double len = norm(mesh.vertices[f.b] - mesh.vertices[f.a]);
            ops.surface_weight[f.a] += 0.5 * len;
            ops.surface_weight[f.b] += 0.5 * len;
            surface_set.insert(f.a);
            surface_set.insert(f.b);
            break;
        }
        case BoundaryTag::Inlet: {
            inlet_set.insert(f.a);
            inlet_set.insert(f.b);
            ops.inlet_facets.push_back(make_bfacet(f));
            break;
        }
        case BoundaryTag::Outlet: {
            auto bf = make_bfacet(f);
            ops.outlet_length += bf.length;
            // Outlet term of d(c,s): int_out (u.n) c s with linear c, s.
            for (int q = 0; q < EdgeQuadrature::n; ++q) {
                const double s = EdgeQuadrature::points()[q].s;
                const double w = EdgeQuadrature::points()[q].w * bf.length * bf.un_gauss[q];
                const double tr_c[2] = {1.0 - s, s};
                const int vid[2] = {f.a, f.b};
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        td.emplace_back(vid[i], vid[j], w * tr_c[i] * tr_c[j]);
            }
            ops.outlet_facets.push_back(bf);
            break;
        }
        default:
            break;
        }
    }
    ops.surface_nodes.assign(surface_set.begin(), surface_set.end());
    ops.inlet_nodes.assign(inlet_set.begin(), inlet_set.end());

    ops.mass.resize(nv, nv);
    ops.mass.setFromTriplets(tm.begin(), tm.end());
    ops.mass.makeCompressed();
    ops.d_op.resize(nv, nv);
    ops.d_op.setFromTriplets(td.begin(), td.end());
    ops.d_op.makeCompressed();
    return ops;
}

double henry_m_update(double m_n, double c_n, double c_np1, double tau, double da_a,
                      double da_d) {
    const double a = (1.0 - 0.5 * tau * da_d) / (1.0 + 0.5 * tau * da_d);
    const double b = 0.5 * tau * da_a / (1.0 + 0.5 * tau * da_d);
    return a * m_n + b * (c_n + c_np1);
}

double langmuir_m_update(double m_n, double c_mid, double tau, const Isotherm& iso) {
    const double g = iso.da_a * c_mid / iso.capacity + iso.da_d;
    return (m_n * (1.0 - 0.5 * tau * g) + tau * iso.da_a * c_mid) / (1.0 + 0.5 * tau * g);
}

CrankNicolsonStepper::CrankNicolsonStepper(const TransportOperators& ops,
                                           const TransportParams& params, double inlet_value)
    : ops_(ops), params_(params), inlet_value_(inlet_value) {
    params_.validate();
    const int nv = static_cast<int>(ops.mass.rows());
    const double tau = params_.tau;
    const auto& iso = params_.isotherm;

    is_inlet_.assign(nv, 0);
    for (int v : ops.inlet_nodes)
        is_inlet_[v] = 1;

    Eigen::SparseMatrix<double> lhs_full = ops.mass * (1.0 / tau) + ops.d_op * 0.5;
    rhs_op_ = ops.mass * (1.0 / tau) - ops.d_op * 0.5;

    if (iso.kind == IsothermKind::Henry) {
        alpha_ = (1.0 - 0.5 * tau * iso.da_d) / (1.0 + 0.5 * tau * iso.da_d);
        beta_ = 0.5 * tau * iso.da_a / (1.0 + 0.5 * tau * iso.da_d);
        // Eliminated m adds (beta/tau) w_i to the diagonal at surface nodes.
        std::vector<Eigen::Triplet<double>> diag;
        for (int v : ops.surface_nodes)
            diag.emplace_back(v, v, beta_ / tau * ops.surface_weight[v]);
        Eigen::SparseMatrix<double> d(nv, nv);
        d.setFromTriplets(diag.begin(), diag.end());
        lhs_full += d;
    }

    // Inlet rows become identity; inlet columns move to the lift vector.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(lhs_full.nonZeros());
    lift_ = Eigen::VectorXd::Zero(nv);
    for (int k = 0; k < lhs_full.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(lhs_full, k); it; ++it) {
            const int r = static_cast<int>(it.row());
            const int c = static_cast<int>(it.col());
            if (is_inlet_[r]) continue;
            if (is_inlet_[c]) {
                lift_[r] += it.value() * inlet_value_;
                continue;
            }
            trip.emplace_back(r, c, it.value());
        }
    }
    for (int v : ops.inlet_nodes)
        trip.emplace_back(v, v, 1.0);
    lhs_.resize(nv, nv);
    lhs_.setFromTriplets(trip.begin(), trip.end());
    lhs_.makeCompressed();
    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->analyzePattern(lhs_);
    lu_->factorize(lhs_);
    if (lu_->info() != Eigen::Success)
        throw SingularSystemError("transport: Crank-Nicolson matrix factorization failed");
}

TransportState CrankNicolsonStepper::initial_state() const {
    TransportState s;
    s.t = 0.0;
    s.c = Eigen::VectorXd::Zero(ops_.mass.rows());
    s.m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ops_.surface_nodes.size()));
    return s;
}

Eigen::VectorXd CrankNicolsonStepper::solve_bulk(const Eigen::VectorXd& rhs_full) const {
    Eigen::VectorXd b = rhs_full - lift_;
    for (int v : ops_.inlet_nodes)
        b[v] = inlet_value_;
    Eigen::VectorXd x = lu_->solve(b);
    return x;
}

namespace {
/// Convective flux with the same edge quadrature the assembly used, so the
/// balance identity holds to round-off.
double convective_flux(const std::vector<TransportOperators::BoundaryFacet>& facets,
                       const Eigen::VectorXd& c_mid) {
    const auto& equad = EdgeQuadrature::points();
    double flux = 0.0;
    for (const auto& bf : facets) {
        for (int q = 0; q < EdgeQuadrature::n; ++q) {
            const double cq = (1.0 - equad[q].s) * c_mid[bf.a] + equad[q].s * c_mid[bf.b];
            flux += equad[q].w * bf.length * bf.un_gauss[q] * cq;
        }
    }
    return flux;
}
} // namespace

void CrankNicolsonStepper::step(TransportState& state) const {
    const double tau = params_.tau;
    const auto& iso = params_.isotherm;
    const auto& snodes = ops_.surface_nodes;
    // The inlet trace carries the boundary value throughout, including at
    // t = 0 where the zero initial field meets the inlet condition; anything
    // else injects a spurious O(tau) mass deficit in the first step.
    for (int v : ops_.inlet_nodes)
        state.c[v] = inlet_value_;
    const Eigen::VectorXd rhs_base = rhs_op_ * state.c;

    Eigen::VectorXd c_new;
    Eigen::VectorXd m_new(state.m.size());

    if (iso.kind == IsothermKind::Henry) {
        Eigen::VectorXd rhs = rhs_base;
        for (std::size_t i = 0; i < snodes.size(); ++i) {
            const int v = snodes[i];
            // Known part of -(w/tau)(m_new - m_old); the c^{n+1} part sits on
            // the matrix diagonal.
            const double known = (alpha_ - 1.0) * state.m[i] + beta_ * state.c[v];
            rhs[v] -= ops_.surface_weight[v] / tau * known;
        }
        c_new = solve_bulk(rhs);
        for (std::size_t i = 0; i < snodes.size(); ++i)
            m_new[i] = alpha_ * state.m[i] + beta_ * (state.c[snodes[i]] + c_new[snodes[i]]);
    } else {
        c_new = state.c;
        m_new = state.m;
        bool converged = false;
        int it = 0;
        double update = 0.0;
        for (it = 1; it <= 50; ++it) {
            Eigen::VectorXd m_next(state.m.size());
            for (std::size_t i = 0; i < snodes.size(); ++i) {
                const double c_mid = 0.5 * (state.c[snodes[i]] + c_new[snodes[i]]);
                m_next[i] = langmuir_m_update(state.m[i], c_mid, tau, iso);
            }
            Eigen::VectorXd rhs = rhs_base;
            for (std::size_t i = 0; i < snodes.size(); ++i) {
                const int v = snodes[i];
                rhs[v] -= ops_.surface_weight[v] / tau * (m_next[i] - state.m[i]);
            }
            Eigen::VectorXd c_next = solve_bulk(rhs);
            update = 0.0;
            if (c_new.size() > 0)
                update += (c_next - c_new).lpNorm<Eigen::Infinity>();
            if (m_new.size() > 0)
                update += (m_next - m_new).lpNorm<Eigen::Infinity>();
            c_new = std::move(c_next);
            m_new = std::move(m_next);
            if (update < 1e-10) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw NonConvergenceError("transport: Langmuir Picard iteration did not converge",
                                      it - 1, update);
    }

    // Discrete inlet influx: what the constrained rows injected. Summing the
    // raw operator rows over the inlet nodes reproduces it exactly.
    const Eigen::VectorXd c_mid = 0.5 * (state.c + c_new);
    const Eigen::VectorXd rate = ops_.mass * ((c_new - state.c) / tau) + ops_.d_op * c_mid;
    double influx = 0.0;
    for (int v : ops_.inlet_nodes)
        influx += rate[v];
    last_inlet_influx_ = influx;
    last_outlet_outflow_ = convective_flux(ops_.outlet_facets, c_mid);

    state.c = std::move(c_new);
    state.m = std::move(m_new);
    state.t += tau;
}

TransportState step_cn(const TransportState& state, const TransportOperators& ops,
                       const TransportParams& params) {
    CrankNicolsonStepper stepper(ops, params);
    TransportState next = state;
    stepper.step(next);
    return next;
}

double compute_outlet_avg(const Eigen::VectorXd& c, const TransportOperators& ops) {
    if (ops.outlet_facets.empty())
        throw FormatError("transport: no OUTLET facets");
    double integral = 0.0;
    for (const auto& bf : ops.outlet_facets)
        integral += bf.length * 0.5 * (c[bf.a] + c[bf.b]);
    return integral / ops.outlet_length;
}

namespace {
double bulk_mass(const Eigen::VectorXd& c, const TransportOperators& ops) {
    // Row sums of the mass matrix give exact P1 integration weights.
    return Eigen::VectorXd::Ones(ops.mass.rows()).dot(ops.mass * c);
}

double surface_mass(const Eigen::VectorXd& m, const TransportOperators& ops) {
    double s = 0.0;
    for (std::size_t i = 0; i < ops.surface_nodes.size(); ++i)
        s += ops.surface_weight[ops.surface_nodes[i]] * m[i];
    return s;
}
} // namespace

TransportResult run_transport(const TransportOperators& ops, const TransportParams& params,
                              const RunOptions& options) {
    const int n = params.n_steps();
    CrankNicolsonStepper stepper(ops, params, options.inlet_value);
    TransportState state = stepper.initial_state();

    // Snapshot times snap to the nearest step.
    std::map<int, double> snap_steps;
    for (double ts : options.snapshot_times) {
        int k = static_cast<int>(std::llround(ts / params.tau));
        k = std::clamp(k, 1, n);
        snap_steps.emplace(k, ts);
    }

    TransportResult result;
    result.curve.times.reserve(n);
    result.curve.values.reserve(n);
    double inflow_integral = 0.0, outflow_integral = 0.0;
    double initial_bulk = 0.0;
    if (options.record_balance) {
        // The integrator starts from the zero field with the inlet trace at
        // its boundary value; that strip carries the initial bulk mass.
        Eigen::VectorXd c0 = state.c;
        for (int v : ops.inlet_nodes)
            c0[v] = options.inlet_value;
        initial_bulk = bulk_mass(c0, ops);
    }
    for (int k = 1; k <= n; ++k) {
        stepper.step(state);
        state.t = k * params.tau; // avoid accumulated round-off in labels
        result.curve.times.push_back(state.t);
        result.curve.values.push_back(compute_outlet_avg(state.c, ops));
        if (snap_steps.count(k))
            result.snapshots.emplace_back(state.t, state.c);
        if (options.record_balance) {
            inflow_integral += params.tau * stepper.last_inlet_influx();
            outflow_integral += params.tau * stepper.last_outlet_outflow();
            BalanceRow row{};
            row.t = state.t;
            row.bulk_mass = bulk_mass(state.c, ops);
            row.surface_mass = surface_mass(state.m, ops);
            row.inflow_integral = inflow_integral;
            row.outflow_integral = outflow_integral;
            row.residual = (row.bulk_mass - initial_bulk) + row.surface_mass -
                           inflow_integral + outflow_integral;
            result.balance.push_back(row);
        }
    }
    return result;
}

TransportResult run_transport(const Mesh& mesh, const FlowField& flow,
                              const TransportParams& params, const RunOptions& options) {
    const TransportOperators ops = assemble_transport(mesh, flow, params.pe);
    return run_transport(ops, params, options);
}

std::vector<BreakthroughCurve> sensitivity_sweep(const Mesh& mesh, const FlowField& flow,
                                                 const TransportParams& base, SweepAxis axis,
                                                 const std::vector<double>& values) {
    std::vector<BreakthroughCurve> curves;
    curves.reserve(values.size());
    TransportOperators ops;
    if (axis != SweepAxis::Pe)
        ops = assemble_transport(mesh, flow, base.pe);
    for (double v : values) {
        TransportParams p = base;
        switch (axis) {
        case SweepAxis::Pe: p.pe = v; break;
        case SweepAxis::DaA: p.isotherm.da_a = v; break;
        case SweepAxis::DaD: p.isotherm.da_d = v; break;
        case SweepAxis::Capacity: p.isotherm.capacity = v; break;
        }
        p.validate();
        if (axis == SweepAxis::Pe)
            curves.push_back(run_transport(mesh, flow, p).curve);
        else
            curves.push_back(run_transport(ops, p).curve);
    }
    return curves;
}

void write_scalar_field(const Eigen::VectorXd& c, double time, std::uint64_t checksum,
                        const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw FormatError("cannot open for writing: " + path);
    f << "porescale-field 1\n";
    f << "MESH_CHECKSUM " << to_hex(checksum) << "\n";
    f << "KIND scalar\n";
    f << "TIME " << format_double(time) << "\n";
    f << "C " << c.size() << "\n";
    for (Eigen::Index i = 0; i < c.size(); ++i)
        f << format_double(c[i]) << "\n";
}

Eigen::VectorXd read_scalar_field(const Mesh& mesh, const std::string& path, double* time) {
    std::ifstream f(path);
    if (!f)
        throw FormatError("cannot open field file: " + path);
    std::string magic, version, key, hex, kind;
    if (!(f >> magic >> version) || magic != "porescale-field" || version != "1")
        throw FormatError("field file: bad header");
    if (!(f >> key >> hex) || key != "MESH_CHECKSUM")
        throw FormatError("field file: missing MESH_CHECKSUM");
    if (hex != to_hex(mesh_checksum(mesh)))
        throw MeshMismatchError("field file was computed on a different mesh");
    if (!(f >> key >> kind) || key != "KIND" || kind != "scalar")
        throw FormatError("field file: not a scalar field");
    double t = 0.0;
    if (!(f >> key >> t) || key != "TIME")
        throw FormatError("field file: missing TIME");
    if (time) *time = t;
    long n = 0;
    if (!(f >> key >> n) || key != "C" || n != static_cast<long>(mesh.n_vertices()))
        throw FormatError("field file: size mismatch");
    Eigen::VectorXd c(n);
    for (long i = 0; i < n; ++i)
        if (!(f >> c[i]))
            throw FormatError("field file: bad record");
    return c;
}

} // namespace porescale
