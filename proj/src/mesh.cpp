#include "porescale/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "delaunay.hpp"
#include "porescale/errors.hpp"
#include "porescale/io_util.hpp"
#include "porescale/rng.hpp"

namespace porescale {

double Mesh::triangle_area(std::size_t t) const {
    const auto& tr = triangles[t];
    const Vec2 a = vertices[tr[0]], b = vertices[tr[1]], c = vertices[tr[2]];
    return 0.5 * cross(b - a, c - a);
}

double Mesh::total_area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        s += triangle_area(t);
    return s;
}

double Mesh::min_angle_deg() const {
    double worst = 180.0;
    for (const auto& tr : triangles) {
        for (int j = 0; j < 3; ++j) {
            const Vec2 p = vertices[tr[j]];
            const Vec2 u = vertices[tr[(j + 1) % 3]] - p;
            const Vec2 v = vertices[tr[(j + 2) % 3]] - p;
            const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v));
            worst = std::min(worst, ang * 180.0 / std::numbers::pi);
        }
    }
    return worst;
}

double Mesh::max_edge_length() const {
    double longest = 0.0;
    for (const auto& tr : triangles)
        for (int j = 0; j < 3; ++j)
            longest = std::max(longest, norm(vertices[tr[(j + 1) % 3]] - vertices[tr[(j + 2) % 3]]));
    return longest;
}

void Mesh::validate() const {
    if (triangles.empty())
        throw FormatError("mesh: empty triangle list");
    const int nv = static_cast<int>(vertices.size());
    for (const auto& tr : triangles)
        for (int v : tr)
            if (v < 0 || v >= nv)
                throw FormatError("mesh: triangle vertex index out of range");
    for (std::size_t t = 0; t < triangles.size(); ++t)
        if (triangle_area(t) <= 0.0)
            throw FormatError("mesh: non-positive triangle area");

    // Conformity: interior edges shared by exactly 2 triangles, boundary
    // edges by 1; the boundary edge set must equal the facet set.
    std::map<std::pair<int, int>, int> edge_count;
    std::set<std::pair<int, int>> directed;
    for (const auto& tr : triangles) {
        for (int j = 0; j < 3; ++j) {
            const int a = tr[j], b = tr[(j + 1) % 3];
            edge_count[std::minmax(a, b)] += 1;
            if (!directed.insert({a, b}).second)
                throw FormatError("mesh: duplicated directed edge (orientation conflict)");
        }
    }
    std::set<std::pair<int, int>> facet_edges;
    for (const auto& f : facets) {
        if (f.a < 0 || f.a >= nv || f.b < 0 || f.b >= nv)
            throw FormatError("mesh: facet vertex index out of range");
        if (!facet_edges.insert(std::minmax(f.a, f.b)).second)
            throw FormatError("mesh: duplicate facet");
        if (!directed.count({f.a, f.b}))
            throw FormatError("mesh: facet not oriented with fluid on its left");
        if (f.tag == BoundaryTag::Surface) {
            if (f.circle < 0 || f.circle >= static_cast<int>(circles.size()))
                throw FormatError("mesh: surface facet without a valid circle");
            const auto& c = circles[f.circle];
            for (int v : {f.a, f.b})
                if (std::abs(norm(vertices[v] - c.center) - c.radius) > 1e-12)
                    throw FormatError("mesh: surface vertex off its circle");
        }
    }
    for (const auto& [e, cnt] : edge_count) {
        if (cnt > 2)
            throw FormatError("mesh: non-manifold edge");
        if (cnt == 1 && !facet_edges.count(e))
            throw FormatError("mesh: untagged boundary edge");
        if (cnt == 2 && facet_edges.count(e))
            throw FormatError("mesh: facet tags an interior edge");
    }
    if (facet_edges.size() != facets.size())
        throw FormatError("mesh: facet list inconsistent");
    std::size_t boundary_edges = 0;
    for (const auto& [e, cnt] : edge_count)
        if (cnt == 1) ++boundary_edges;
    if (boundary_edges != facets.size())
        throw FormatError("mesh: facets do not cover the boundary");
}

namespace {

struct SubSegment {
    int a, b;
    BoundaryTag tag;
    int circle;
};

Vec2 project_to_circle(Vec2 p, const ObstacleCircle& c) {
    const Vec2 d = p - c.center;
    const double n = norm(d);
    if (n == 0.0) return {c.center.x + c.radius, c.center.y};
    return c.center + (c.radius / n) * d;
}

/// Splits the domain outline into chords of length <= h, keeping new
/// surface points on their exact circle. Returns the boundary point chain
/// plus the constrained sub-segments (indices into the chain).
void subdivide_boundary(const PlanarDomain& dom, double h, std::vector<Vec2>& pts,
                        std::vector<SubSegment>& subsegs) {
    pts.clear();
    subsegs.clear();
    for (const auto& seg : dom.segments) {
        const double len = norm(seg.b - seg.a);
        if (len < 1e-14) continue;
        if (pts.empty()) pts.push_back(seg.a);
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
        int prev = static_cast<int>(pts.size()) - 1;
        for (int i = 1; i <= pieces; ++i) {
            Vec2 p;
            if (i == pieces) {
                p = seg.b;
            } else {
                const double s = static_cast<double>(i) / pieces;
                p = seg.a + s * (seg.b - seg.a);
                if (seg.circle >= 0) p = project_to_circle(p, dom.circles[seg.circle]);
            }
            int cur;
            const bool closing = (i == pieces) && (&seg == &dom.segments.back());
            if (closing) {
                cur = 0; // loop closes on the first point
            } else {
                pts.push_back(p);
                cur = static_cast<int>(pts.size()) - 1;
            }
            subsegs.push_back({prev, cur, seg.tag, seg.circle});
            prev = cur;
        }
    }
    if (pts.size() < 3)
        throw FormatError("triangulate: degenerate boundary");
}

bool inside_with_clearance(Vec2 p, const PlanarDomain& dom, double c) {
    const auto& g = dom.config;
    if (p.x < c || p.x > g.length - c || p.y < c || p.y > g.height - c) return false;
    for (const auto& circ : dom.circles)
        if (norm(p - circ.center) < circ.radius + c) return false;
    return true;
}

std::vector<Vec2> hex_seeds(const PlanarDomain& dom, double h) {
    const auto& g = dom.config;
    std::vector<Vec2> seeds;
    const double dy = h * std::numbers::sqrt3 / 2.0;
    const double clearance = 0.7 * h;
    int row = 0;
    for (double y = dy; y < g.height - 0.5 * clearance; y += dy, ++row) {
        const double x0 = (row % 2 == 0) ? h : h / 2.0;
        int col = 0;
        for (double x = x0; x < g.length - 0.5 * clearance; x += h, ++col) {
            // Deterministic jitter breaks the exact cocircularity of the
            // lattice before the first Delaunay pass.
            const std::uint64_t k = static_cast<std::uint64_t>(row) << 32 | static_cast<std::uint64_t>(col);
            Vec2 p{x + 0.05 * h * rng::uniform_sym(0x9c0u, 2 * k),
                   y + 0.05 * h * rng::uniform_sym(0x9c0u, 2 * k + 1)};
            if (inside_with_clearance(p, dom, clearance))
                seeds.push_back(p);
        }
    }
    return seeds;
}

struct BuiltMesh {
    std::vector<Vec2> points;
    std::vector<detail::DelaunayTriangulation::ExtractedTri> tris;
    std::vector<int> boundary_map; // boundary chain index -> mesh vertex
    std::size_t n_boundary = 0;
};

BuiltMesh build_once(const PlanarDomain& dom, const std::vector<Vec2>& bpts,
                     const std::vector<SubSegment>& subsegs, const std::vector<Vec2>& seeds) {
    const auto& g = dom.config;
    detail::DelaunayTriangulation dt({0.0, 0.0}, {g.length, g.height});
    std::vector<int> bid(bpts.size());
    for (std::size_t i = 0; i < bpts.size(); ++i)
        bid[i] = dt.insert(bpts[i]);
    for (const auto& p : seeds)
        dt.insert(p);
    for (const auto& s : subsegs)
        dt.insert_constraint(bid[s.a], bid[s.b]);
    dt.legalize_all();
    dt.classify_exterior();

    BuiltMesh out;
    std::vector<int> vmap;
    dt.extract(out.points, out.tris, vmap);
    out.boundary_map.resize(bpts.size());
    for (std::size_t i = 0; i < bpts.size(); ++i) {
        out.boundary_map[i] = vmap[bid[i]];
        if (out.boundary_map[i] < 0)
            throw MeshQualityError("triangulate: boundary vertex lost");
    }
    out.n_boundary = bpts.size();
    return out;
}

} // namespace

Mesh triangulate(const PlanarDomain& domain, double h_target) {
    if (!(h_target > 0.0))
        throw ConfigError("triangulate: h_target must be positive");
    if (domain.config.obstacle_count > 0 && h_target >= domain.config.obstacle_radius)
        throw ConfigError("triangulate: h_target must be below the obstacle radius");

    std::vector<Vec2> bpts;
    std::vector<SubSegment> subsegs;
    subdivide_boundary(domain, h_target, bpts, subsegs);
    std::vector<Vec2> seeds = hex_seeds(domain, h_target);

    BuiltMesh built = build_once(domain, bpts, subsegs, seeds);

    // Lloyd-style smoothing: move interior vertices to the average of their
    // neighbours (clamped to keep clearance from the boundary), rebuild.
    for (int round = 0; round < 2; ++round) {
        const std::size_t nb = bpts.size();
        std::vector<char> is_boundary(built.points.size(), 0);
        for (int v : built.boundary_map)
            is_boundary[v] = 1;
        std::vector<Vec2> acc(built.points.size(), Vec2{0.0, 0.0});
        std::vector<int> deg(built.points.size(), 0);
        for (const auto& t : built.tris) {
            for (int j = 0; j < 3; ++j) {
                const int a = t.v[j], b = t.v[(j + 1) % 3];
                acc[a] = acc[a] + built.points[b];
                acc[b] = acc[b] + built.points[a];
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        // Each undirected edge was visited once per adjacent triangle;
        // interior vertices average over their full one-ring this way.
        std::vector<Vec2> new_seeds;
        new_seeds.reserve(built.points.size() - nb);
        for (std::size_t v = 0; v < built.points.size(); ++v) {
            if (is_boundary[v]) continue;
            Vec2 p = built.points[v];
            if (deg[v] > 0) {
                Vec2 avg{acc[v].x / deg[v], acc[v].y / deg[v]};
                if (inside_with_clearance(avg, domain, 0.3 * h_target)) p = avg;
            }
            new_seeds.push_back(p);
        }
        built = build_once(domain, bpts, subsegs, new_seeds);
    }

    Mesh mesh;
    mesh.h_target = h_target;
    mesh.vertices = built.points;
    mesh.circles = domain.circles;
    mesh.triangles.reserve(built.tris.size());
    for (const auto& t : built.tris)
        mesh.triangles.push_back({t.v[0], t.v[1], t.v[2]});
    mesh.facets.reserve(subsegs.size());
    for (const auto& s : subsegs)
        mesh.facets.push_back({built.boundary_map[s.a], built.boundary_map[s.b], s.tag, s.circle});

    mesh.validate();
    const double min_ang = mesh.min_angle_deg();
    if (min_ang < 15.0)
        throw MeshQualityError("triangulate: minimum angle " + format_double(min_ang) +
                               " deg is below 15 deg");
    if (mesh.max_edge_length() > 2.0 * h_target)
        throw MeshQualityError("triangulate: max edge exceeds 2*h_target");
    return mesh;
}

Mesh refine(const Mesh& mesh) {
    Mesh out;
    out.h_target = mesh.h_target / 2.0;
    out.vertices = mesh.vertices;
    out.circles = mesh.circles;

    std::map<std::pair<int, int>, int> surface_circle;
    for (const auto& f : mesh.facets)
        if (f.tag == BoundaryTag::Surface)
            surface_circle[std::minmax(f.a, f.b)] = f.circle;

    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        Vec2 m = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
        auto sc = surface_circle.find(key);
        if (sc != surface_circle.end())
            m = project_to_circle(m, mesh.circles[sc->second]);
        const int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(m);
        midpoint.emplace(key, id);
        return id;
    };

    out.triangles.reserve(4 * mesh.triangles.size());
    for (const auto& tr : mesh.triangles) {
        const int m01 = mid(tr[0], tr[1]);
        const int m12 = mid(tr[1], tr[2]);
        const int m20 = mid(tr[2], tr[0]);
        out.triangles.push_back({tr[0], m01, m20});
        out.triangles.push_back({tr[1], m12, m01});
        out.triangles.push_back({tr[2], m20, m12});
        out.triangles.push_back({m01, m12, m20});
    }
    out.facets.reserve(2 * mesh.facets.size());
    for (const auto& f : mesh.facets) {
        const int m = mid(f.a, f.b);
        out.facets.push_back({f.a, m, f.tag, f.circle});
        out.facets.push_back({m, f.b, f.tag, f.circle});
    }
    return out;
}

std::vector<Mesh> refinement_ladder(const PlanarDomain& domain, double h_target, int levels) {
    std::vector<Mesh> ladder;
    ladder.push_back(triangulate(domain, h_target));
    for (int i = 0; i < levels; ++i)
        ladder.push_back(refine(ladder.back()));
    return ladder;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
    out << "porescale-mesh 1\n";
    out << "H_TARGET " << format_double(mesh.h_target) << "\n";
    out << "VERTICES " << mesh.vertices.size() << "\n";
    for (const auto& v : mesh.vertices)
        out << format_double(v.x) << " " << format_double(v.y) << "\n";
    out << "TRIANGLES " << mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles)
        out << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "FACETS " << mesh.facets.size() << "\n";
    for (const auto& f : mesh.facets)
        out << f.a << " " << f.b << " " << to_string(f.tag) << " " << f.circle << "\n";
    out << "CIRCLES " << mesh.circles.size() << "\n";
    for (const auto& c : mesh.circles)
        out << format_double(c.center.x) << " " << format_double(c.center.y) << " "
            << format_double(c.radius) << " " << (c.wall_bottom ? 1 : 0) << "\n";
}

void write_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw FormatError("cannot open for writing: " + path);
    write_mesh(mesh, f);
}

namespace {
std::string next_token(std::istream& in) {
    std::string tok;
    if (!(in >> tok))
        throw FormatError("mesh file: unexpected end of input");
    return tok;
}

long read_count(std::istream& in, const char* section) {
    const std::string tok = next_token(in);
    if (tok != section)
        throw FormatError(std::string("mesh file: expected section ") + section + ", got " + tok);
    long n = 0;
    if (!(in >> n) || n < 0)
        throw FormatError(std::string("mesh file: bad count in section ") + section);
    return n;
}
} // namespace

Mesh read_mesh(std::istream& in) {
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "porescale-mesh" || version != "1")
        throw FormatError("mesh file: bad header");
    Mesh mesh;
    if (next_token(in) != "H_TARGET" || !(in >> mesh.h_target))
        throw FormatError("mesh file: bad H_TARGET");

    const long nv = read_count(in, "VERTICES");
    mesh.vertices.resize(nv);
    for (auto& v : mesh.vertices)
        if (!(in >> v.x >> v.y))
            throw FormatError("mesh file: bad vertex record");

    const long nt = read_count(in, "TRIANGLES");
    mesh.triangles.resize(nt);
    for (auto& t : mesh.triangles)
        if (!(in >> t[0] >> t[1] >> t[2]))
            throw FormatError("mesh file: bad triangle record");

    const long nf = read_count(in, "FACETS");
    mesh.facets.resize(nf);
    for (auto& f : mesh.facets) {
        std::string tag;
        if (!(in >> f.a >> f.b >> tag >> f.circle))
            throw FormatError("mesh file: bad facet record");
        f.tag = boundary_tag_from_string(tag);
    }

    const long nc = read_count(in, "CIRCLES");
    mesh.circles.resize(nc);
    for (auto& c : mesh.circles) {
        int wb = 0;
        if (!(in >> c.center.x >> c.center.y >> c.radius >> wb))
            throw FormatError("mesh file: bad circle record");
        c.wall_bottom = wb != 0;
    }

    mesh.validate();
    return mesh;
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw FormatError("cannot open mesh file: " + path);
    return read_mesh(f);
}

std::uint64_t mesh_checksum(const Mesh& mesh) {
    std::ostringstream ss;
    write_mesh(mesh, ss);
    return fnv1a64(ss.str());
}

} // namespace porescale
