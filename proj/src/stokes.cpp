#include "porescale/stokes.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "porescale/errors.hpp"
#include "porescale/io_util.hpp"
#include "porescale/quadrature.hpp"

namespace porescale {

void FlowBCs::validate() const {
    if (!(inlet_normal_speed > 0.0))
        throw ConfigError("flow: inlet_normal_speed must be positive");
}

TaylorHoodSpace::TaylorHoodSpace(const Mesh& mesh)
    : edges(mesh), n_vertices(mesh.n_vertices()) {}

namespace {

Vec2 outward_normal(const Mesh& mesh, const Facet& f) {
    const Vec2 d = mesh.vertices[f.b] - mesh.vertices[f.a];
    const double len = norm(d);
    return {d.y / len, -d.x / len};
}

struct VelocityConstraints {
    // fix[comp][node] set when the component is prescribed
    std::vector<std::optional<double>> fix[2];

    explicit VelocityConstraints(std::size_t n_nodes) {
        fix[0].resize(n_nodes);
        fix[1].resize(n_nodes);
    }
};

/// Dirichlet data on velocity nodes. Processing order SYMMETRY, INLET,
/// SURFACE lets the stronger condition win at shared corner nodes.
VelocityConstraints velocity_constraints(const Mesh& mesh, const TaylorHoodSpace& space,
                                         const FlowBCs& bcs) {
    VelocityConstraints vc(space.n_vel_nodes());
    const int nv = static_cast<int>(mesh.n_vertices());
    auto facet_nodes = [&](const Facet& f) {
        return std::array<int, 3>{f.a, f.b, nv + space.edges.index(f.a, f.b)};
    };
    for (BoundaryTag pass : {BoundaryTag::Symmetry, BoundaryTag::Inlet, BoundaryTag::Surface}) {
        for (const auto& f : mesh.facets) {
            if (f.tag != pass) continue;
            const Vec2 n = outward_normal(mesh, f);
            for (int node : facet_nodes(f)) {
                switch (pass) {
                case BoundaryTag::Symmetry: {
                    // u.n = 0 on an axis-aligned facet pins one component.
                    if (std::abs(n.x) > 1.0 - 1e-9) {
                        vc.fix[0][node] = 0.0;
                    } else if (std::abs(n.y) > 1.0 - 1e-9) {
                        vc.fix[1][node] = 0.0;
                    } else {
                        throw ConfigError("stokes: symmetry facet is not axis-aligned");
                    }
                    break;
                }
                case BoundaryTag::Inlet:
                    // u = -n * speed (inflow), tangential component zero.
                    vc.fix[0][node] = -n.x * bcs.inlet_normal_speed;
                    vc.fix[1][node] = -n.y * bcs.inlet_normal_speed;
                    break;
                case BoundaryTag::Surface:
                    vc.fix[0][node] = 0.0;
                    vc.fix[1][node] = 0.0;
                    break;
                default:
                    break;
                }
            }
        }
    }
    return vc;
}

} // namespace

StokesSystem assemble_stokes(const Mesh& mesh, const FlowBCs& bcs) {
    bcs.validate();
    bool has_inlet = false, has_outlet = false, has_symmetry = false;
    for (const auto& f : mesh.facets) {
        has_inlet |= f.tag == BoundaryTag::Inlet;
        has_outlet |= f.tag == BoundaryTag::Outlet;
        has_symmetry |= f.tag == BoundaryTag::Symmetry;
    }
    if (!has_outlet)
        throw SingularSystemError("stokes: no OUTLET facets, pressure datum lost");
    if (!has_inlet || !has_symmetry)
        throw FormatError("stokes: mesh is missing INLET or SYMMETRY facets");

    StokesSystem sys{TaylorHoodSpace(mesh), {}, {}, {}};
    const TaylorHoodSpace& sp = sys.space;
    const std::size_t n = sp.n_dofs();
    sys.rhs = Eigen::VectorXd::Zero(n);
    sys.constrained.assign(n, 0);

    const VelocityConstraints vc = velocity_constraints(mesh, sp, bcs);
    Eigen::VectorXd dirichlet = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < 2; ++c)
        for (std::size_t node = 0; node < sp.n_vel_nodes(); ++node)
            if (vc.fix[c][node]) {
                const int dof = sp.vel_dof(static_cast<int>(node), c);
                sys.constrained[dof] = 1;
                dirichlet[dof] = *vc.fix[c][node];
            }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.n_triangles() * 160);
    auto emit = [&](int r, int c, double v) {
        if (v == 0.0) return;
        if (sys.constrained[r]) return;
        if (sys.constrained[c]) {
            sys.rhs[r] -= v * dirichlet[c];
            return;
        }
        trip.emplace_back(r, c, v);
    };

    const auto& quad = TriQuadrature::points();
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeometry geo(mesh, t);
        const auto nodes = sp.edges.p2_nodes(mesh, t);
        const auto& tr = mesh.triangles[t];

        double a_el[6][6] = {};
        double b_el[3][6][2] = {}; // pressure vertex, velocity node, component
        for (const auto& q : quad) {
            const auto grads = p2::gradients(q.l0, q.l1, q.l2, geo.grad_l);
            const double lam[3] = {q.l0, q.l1, q.l2};
            const double w = q.w * geo.area;
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                    a_el[i][j] += w * dot(grads[i], grads[j]);
            for (int pq = 0; pq < 3; ++pq)
                for (int j = 0; j < 6; ++j) {
                    b_el[pq][j][0] += w * lam[pq] * grads[j].x;
                    b_el[pq][j][1] += w * lam[pq] * grads[j].y;
                }
        }
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                for (int c = 0; c < 2; ++c)
                    emit(sp.vel_dof(nodes[i], c), sp.vel_dof(nodes[j], c), a_el[i][j]);
        // Symmetric saddle form: [A, -B^T; -B, 0].
        for (int pq = 0; pq < 3; ++pq) {
            const int pdof = sp.pressure_dof(tr[pq]);
            for (int j = 0; j < 6; ++j)
                for (int c = 0; c < 2; ++c) {
                    emit(sp.vel_dof(nodes[j], c), pdof, -b_el[pq][j][c]);
                    emit(pdof, sp.vel_dof(nodes[j], c), -b_el[pq][j][c]);
                }
        }
    }

    // Outlet natural term: -\int_out pbar (v . n) enters the momentum rhs.
    if (bcs.outlet_pressure != 0.0) {
        const int nv = static_cast<int>(mesh.n_vertices());
        for (const auto& f : mesh.facets) {
            if (f.tag != BoundaryTag::Outlet) continue;
            const Vec2 n = outward_normal(mesh, f);
            const double len = norm(mesh.vertices[f.b] - mesh.vertices[f.a]);
            const int enodes[3] = {f.a, f.b, nv + sp.edges.index(f.a, f.b)};
            // Simpson weights for the 1D quadratic trace (a, b, midpoint).
            const double wts[3] = {len / 6.0, len / 6.0, 4.0 * len / 6.0};
            for (int k = 0; k < 3; ++k) {
                for (int c = 0; c < 2; ++c) {
                    const int dof = sp.vel_dof(enodes[k], c);
                    if (!sys.constrained[dof])
                        sys.rhs[dof] -= bcs.outlet_pressure * (c == 0 ? n.x : n.y) * wts[k];
                }
            }
        }
    }

    for (std::size_t d = 0; d < n; ++d)
        if (sys.constrained[d]) {
            trip.emplace_back(static_cast<int>(d), static_cast<int>(d), 1.0);
            sys.rhs[d] = dirichlet[d];
        }

    sys.matrix.resize(static_cast<int>(n), static_cast<int>(n));
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();
    return sys;
}

FlowField solve_stokes(const Mesh& mesh, const FlowBCs& bcs) {
    StokesSystem sys = assemble_stokes(mesh, bcs);

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(sys.matrix);
    lu.factorize(sys.matrix);
    if (lu.info() != Eigen::Success)
        throw SingularSystemError("stokes: saddle-point factorization failed");
    Eigen::VectorXd x = lu.solve(sys.rhs);

    const double bnorm = std::max(1.0, sys.rhs.norm());
    const double residual = (sys.matrix * x - sys.rhs).norm() / bnorm;
    if (!(residual <= 1e-10))
        throw LinearSolveError("stokes: linear solve residual too large", residual);

    FlowField field{sys.space, {}, {}, residual, mesh_checksum(mesh)};
    field.u = x.head(sys.space.n_velocity_dofs());
    field.p = x.tail(sys.space.n_pressure_dofs());
    return field;
}

Vec2 FlowField::velocity_at(const Mesh& mesh, std::size_t t, double l0, double l1,
                            double l2) const {
    const auto nodes = space.edges.p2_nodes(mesh, t);
    const auto vals = p2::values(l0, l1, l2);
    Vec2 v{0.0, 0.0};
    for (int i = 0; i < 6; ++i) {
        v.x += vals[i] * u[space.vel_dof(nodes[i], 0)];
        v.y += vals[i] * u[space.vel_dof(nodes[i], 1)];
    }
    return v;
}

double flux_through(const Mesh& mesh, const FlowField& field, BoundaryTag tag) {
    const int nv = static_cast<int>(mesh.n_vertices());
    double flux = 0.0;
    for (const auto& f : mesh.facets) {
        if (f.tag != tag) continue;
        const Vec2 n = outward_normal(mesh, f);
        const double len = norm(mesh.vertices[f.b] - mesh.vertices[f.a]);
        const int m = nv + field.space.edges.index(f.a, f.b);
        for (int c = 0; c < 2; ++c) {
            const double ua = field.u[field.space.vel_dof(f.a, c)];
            const double ub = field.u[field.space.vel_dof(f.b, c)];
            const double um = field.u[field.space.vel_dof(m, c)];
            const double integral = len * (ua + 4.0 * um + ub) / 6.0;
            flux += (c == 0 ? n.x : n.y) * integral;
        }
    }
    return flux;
}

LineSamples sample_along_line(const Mesh& mesh, const FlowField& field, double y, int n_samples) {
    LineSamples out;
    const PointLocator locator(mesh);
    double xmax = 0.0;
    for (const auto& v : mesh.vertices)
        xmax = std::max(xmax, v.x);
    for (int i = 0; i < n_samples; ++i) {
        const double x = xmax * i / (n_samples - 1);
        out.x.push_back(x);
        int t = -1;
        const auto bary = locator.locate({x, y}, t);
        if (!bary) {
            out.u1.push_back(0.0);
            out.u2.push_back(0.0);
            out.p.push_back(0.0);
            out.present.push_back(0);
            continue;
        }
        const auto [l0, l1, l2] = *bary;
        const Vec2 v = field.velocity_at(mesh, t, l0, l1, l2);
        const auto& tr = mesh.triangles[t];
        const double p = l0 * field.p[tr[0]] + l1 * field.p[tr[1]] + l2 * field.p[tr[2]];
        out.u1.push_back(v.x);
        out.u2.push_back(v.y);
        out.p.push_back(p);
        out.present.push_back(1);
    }
    return out;
}

ScalarLineSamples sample_scalar_along_line(const Mesh& mesh, const Eigen::VectorXd& nodal,
                                           double y, int n_samples) {
    ScalarLineSamples out;
    const PointLocator locator(mesh);
    double xmax = 0.0;
    for (const auto& v : mesh.vertices)
        xmax = std::max(xmax, v.x);
    for (int i = 0; i < n_samples; ++i) {
        const double x = xmax * i / (n_samples - 1);
        out.x.push_back(x);
        int t = -1;
        const auto bary = locator.locate({x, y}, t);
        if (!bary) {
            out.value.push_back(0.0);
            out.present.push_back(0);
            continue;
        }
        const auto [l0, l1, l2] = *bary;
        const auto& tr = mesh.triangles[t];
        out.value.push_back(l0 * nodal[tr[0]] + l1 * nodal[tr[1]] + l2 * nodal[tr[2]]);
        out.present.push_back(1);
    }
    return out;
}

void write_flow_field(const FlowField& field, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw FormatError("cannot open for writing: " + path);
    f << "porescale-field 1\n";
    f << "MESH_CHECKSUM " << to_hex(field.mesh_checksum) << "\n";
    f << "KIND flow\n";
    f << "RESIDUAL " << format_double(field.solver_residual) << "\n";
    f << "U " << field.u.size() << "\n";
    for (Eigen::Index i = 0; i < field.u.size(); ++i)
        f << format_double(field.u[i]) << "\n";
    f << "P " << field.p.size() << "\n";
    for (Eigen::Index i = 0; i < field.p.size(); ++i)
        f << format_double(field.p[i]) << "\n";
}

FlowField read_flow_field(const Mesh& mesh, const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw FormatError("cannot open field file: " + path);
    std::string magic, version;
    if (!(f >> magic >> version) || magic != "porescale-field" || version != "1")
        throw FormatError("field file: bad header");
    std::string key, hex;
    if (!(f >> key >> hex) || key != "MESH_CHECKSUM")
        throw FormatError("field file: missing MESH_CHECKSUM");
    std::string kind;
    if (!(f >> key >> kind) || key != "KIND" || kind != "flow")
        throw FormatError("field file: not a flow field");

    FlowField field{TaylorHoodSpace(mesh), {}, {}, 0.0, mesh_checksum(mesh)};
    if (hex != to_hex(field.mesh_checksum))
        throw MeshMismatchError("field file was computed on a different mesh");

    double residual = 0.0;
    if (!(f >> key >> residual) || key != "RESIDUAL")
        throw FormatError("field file: missing RESIDUAL");
    field.solver_residual = residual;

    long nu = 0;
    if (!(f >> key >> nu) || key != "U" || nu != static_cast<long>(field.space.n_velocity_dofs()))
        throw FormatError("field file: velocity size mismatch");
    field.u.resize(nu);
    for (long i = 0; i < nu; ++i)
        if (!(f >> field.u[i]))
            throw FormatError("field file: bad velocity record");
    long np = 0;
    if (!(f >> key >> np) || key != "P" || np != static_cast<long>(field.space.n_pressure_dofs()))
        throw FormatError("field file: pressure size mismatch");
    field.p.resize(np);
    for (long i = 0; i < np; ++i)
        if (!(f >> field.p[i]))
            throw FormatError("field file: bad pressure record");
    return field;
}

} // namespace porescale
