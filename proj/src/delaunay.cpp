#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include "porescale/errors.hpp"

namespace porescale::detail {

namespace {

std::pair<int, int> ordered(int a, int b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

/// > 0 if (a,b,c) is CCW, < 0 if CW, 0 for (numerically) collinear. The
/// epsilon tracks the magnitude of the evaluated products, so the zero band
/// stays two orders above long-double rounding noise at any scale.
int orient(Vec2 a, Vec2 b, Vec2 c, double /*scale*/) {
    const long double p1 = (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y);
    const long double p2 = (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
    const long double det = p1 - p2;
    const long double eps = 1e-17L * (std::abs(p1) + std::abs(p2));
    if (det > eps) return 1;
    if (det < -eps) return -1;
    return 0;
}

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double scale) {
    const int o1 = orient(a, b, c, scale);
    const int o2 = orient(a, b, d, scale);
    const int o3 = orient(c, d, a, scale);
    const int o4 = orient(c, d, b, scale);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

} // namespace

DelaunayTriangulation::DelaunayTriangulation(Vec2 lo, Vec2 hi) {
    const double w = std::max({hi.x - lo.x, hi.y - lo.y, 1e-12});
    scale_ = std::max({std::abs(lo.x), std::abs(lo.y), std::abs(hi.x), std::abs(hi.y), w});
    const double cx = 0.5 * (lo.x + hi.x);
    const double cy = 0.5 * (lo.y + hi.y);
    const double r = 64.0 * w;
    pts_.push_back({cx - 2.0 * r, cy - r});
    pts_.push_back({cx + 2.0 * r, cy - r});
    pts_.push_back({cx, cy + 2.0 * r});
    tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true, false});
    vert2tri_ = {0, 0, 0};
    scale_ = std::max(scale_, 3.0 * r);
}

bool DelaunayTriangulation::in_circumcircle(const Tri& t, Vec2 p) const {
    const Vec2 a = pts_[t.v[0]], b = pts_[t.v[1]], c = pts_[t.v[2]];
    const long double ax = a.x - p.x, ay = a.y - p.y;
    const long double bx = b.x - p.x, by = b.y - p.y;
    const long double cx = c.x - p.x, cy = c.y - p.y;
    const long double a2 = ax * ax + ay * ay;
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    const long double t1 = ax * (by * c2 - b2 * cy);
    const long double t2 = ay * (bx * c2 - b2 * cx);
    const long double t3 = a2 * (bx * cy - by * cx);
    const long double det = t1 - t2 + t3;
    // Ties (exactly cocircular points, common on seeded lattices and
    // polygonalized circles) count as "outside", which keeps cavity growth
    // consistent.
    const long double eps = 1e-16L * (std::abs(t1) + std::abs(t2) + std::abs(t3));
    return det > eps;
}

int DelaunayTriangulation::locate(Vec2 p, int hint) const {
    int t = hint;
    if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive) {
        t = -1;
        for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
            if (tris_[i].alive) {
                t = i;
                break;
            }
    }
    const int max_steps = 4 * static_cast<int>(tris_.size()) + 16;
    int prev = -1;
    for (int step = 0; step < max_steps; ++step) {
        const Tri& tr = tris_[t];
        int next = -1;
        for (int j = 0; j < 3; ++j) {
            const int u = tr.v[(j + 1) % 3], w = tr.v[(j + 2) % 3];
            if (orient(pts_[u], pts_[w], p, scale_) < 0) {
                if (tr.adj[j] >= 0 && tr.adj[j] != prev) {
                    next = tr.adj[j];
                    break;
                }
                if (tr.adj[j] >= 0 && next < 0) next = tr.adj[j];
            }
        }
        if (next < 0) return t;
        prev = t;
        t = next;
    }
    // Walk cycled on a numerically degenerate configuration: fall back to an
    // exhaustive scan.
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
        if (!tris_[i].alive) continue;
        const Tri& tr = tris_[i];
        bool inside = true;
        for (int j = 0; j < 3 && inside; ++j)
            inside = orient(pts_[tr.v[(j + 1) % 3]], pts_[tr.v[(j + 2) % 3]], p, scale_) >= 0;
        if (inside) return i;
    }
    throw MeshQualityError("triangulation: point location failed");
}

int DelaunayTriangulation::insert(Vec2 p) {
    const int pid = static_cast<int>(pts_.size());
    pts_.push_back(p);
    vert2tri_.push_back(-1);

    const int t0 = locate(p, last_tri_);

    // Grow the cavity of triangles whose circumcircle strictly contains p.
    std::vector<int> cavity;
    std::vector<char> in_cavity(tris_.size(), 0);
    cavity.push_back(t0);
    in_cavity[t0] = 1;
    struct BEdge {
        int u, w, outer;
    };
    std::vector<BEdge> boundary;
    for (std::size_t k = 0; k < cavity.size(); ++k) {
        const int ti = cavity[k];
        const Tri tr = tris_[ti];
        for (int j = 0; j < 3; ++j) {
            const int nb = tr.adj[j];
            const int u = tr.v[(j + 1) % 3], w = tr.v[(j + 2) % 3];
            if (nb >= 0 && in_cavity[nb]) continue;
            if (nb >= 0 && in_circumcircle(tris_[nb], p)) {
                cavity.push_back(nb);
                in_cavity[nb] = 1;
            } else {
                boundary.push_back({u, w, nb});
            }
        }
    }
    for (int ti : cavity)
        tris_[ti].alive = false;

    // Fan new triangles (p, u, w) over the cavity boundary.
    std::map<int, int> tri_with_first;  // u -> triangle having edge (p, u)
    std::map<int, int> tri_with_second; // w -> triangle having edge (w, p)
    std::vector<int> created;
    created.reserve(boundary.size());
    for (const BEdge& e : boundary) {
        const int ti = static_cast<int>(tris_.size());
        tris_.push_back({{pid, e.u, e.w}, {e.outer, -1, -1}, true, false});
        created.push_back(ti);
        tri_with_first[e.u] = ti;
        tri_with_second[e.w] = ti;
        if (e.outer >= 0) {
            Tri& out = tris_[e.outer];
            for (int j = 0; j < 3; ++j) {
                const int u2 = out.v[(j + 1) % 3], w2 = out.v[(j + 2) % 3];
                if (u2 == e.w && w2 == e.u) out.adj[j] = ti;
            }
        }
        vert2tri_[e.u] = ti;
        vert2tri_[e.w] = ti;
    }
    for (int ti : created) {
        Tri& t = tris_[ti];
        t.adj[2] = tri_with_second.at(t.v[1]); // edge (p,u) pairs with (u,p)
        t.adj[1] = tri_with_first.at(t.v[2]);  // edge (w,p) pairs with (p,w)
    }
    vert2tri_[pid] = created.empty() ? -1 : created.front();
    last_tri_ = created.empty() ? last_tri_ : created.front();
    return pid;
}

bool DelaunayTriangulation::edge_constrained(int u, int v) const {
    return constrained_.count(ordered(u, v)) > 0;
}

int DelaunayTriangulation::find_edge(int a, int b, int& jout) const {
    // Circulate around a via the fan starting at vert2tri_[a].
    const int start = vert2tri_[a];
    if (start < 0) return -1;
    int t = start;
    for (int guard = 0; guard < 1 << 20; ++guard) {
        const Tri& tr = tris_[t];
        int ia = -1;
        for (int j = 0; j < 3; ++j)
            if (tr.v[j] == a) ia = j;
        if (ia < 0) return -1;
        if (tr.v[(ia + 1) % 3] == b) {
            jout = (ia + 2) % 3;
            return t;
        }
        const int nxt = tr.adj[(ia + 2) % 3]; // rotate CCW around a
        if (nxt < 0 || nxt == start) break;
        t = nxt;
    }
    // Rotate the other way in case the fan is open (should not happen while
    // the super-triangle is present, but cheap to cover).
    int t2 = start;
    for (int guard = 0; guard < 1 << 20; ++guard) {
        const Tri& tr = tris_[t2];
        int ia = -1;
        for (int j = 0; j < 3; ++j)
            if (tr.v[j] == a) ia = j;
        if (ia < 0) return -1;
        if (tr.v[(ia + 1) % 3] == b) {
            jout = (ia + 2) % 3;
            return t2;
        }
        const int nxt = tr.adj[(ia + 1) % 3];
        if (nxt < 0 || nxt == start) return -1;
        t2 = nxt;
    }
    return -1;
}

void DelaunayTriangulation::flip(int t, int j) {
    // Edge e = (u,w) shared between t and o becomes (v_t, v_o).
    const int o = tris_[t].adj[j];
    Tri tr = tris_[t];
    const int u = tr.v[(j + 1) % 3], w = tr.v[(j + 2) % 3], vt = tr.v[j];
    Tri ot = tris_[o];
    int jo = -1;
    for (int k = 0; k < 3; ++k)
        if (ot.v[(k + 1) % 3] == w && ot.v[(k + 2) % 3] == u) jo = k;
    const int vo = ot.v[jo];
    const int tuo = ot.adj[(jo + 1) % 3]; // neighbor of o across (vo, u)... see below
    const int tow = ot.adj[(jo + 2) % 3];
    const int tut = tr.adj[(j + 2) % 3]; // neighbor of t across (vt, u)
    const int twt = tr.adj[(j + 1) % 3]; // neighbor of t across (w, vt)

    // o has edges: (vo, w), (w, u), (u, vo) with opposite indices jo+? :
    //   edge (w,u) opposite vo; edge (u,vo) opposite w -> adj[(jo+1)%3]? Tri o
    //   vertices (vo, w, u) in CCW starting at jo: v[jo]=vo, v[jo+1]=w,
    //   v[jo+2]=u. adj[(jo+1)%3] faces edge (u, vo); adj[(jo+2)%3] faces
    //   edge (vo, w).
    const int o_u_vo = tuo;
    const int o_vo_w = tow;

    tris_[t] = {{vt, u, vo}, {o_u_vo, o, tut}, true, false};
    tris_[o] = {{vt, vo, w}, {o_vo_w, twt, t}, true, false};

    auto fix_adj = [&](int nb, int oldt, int newt) {
        if (nb < 0) return;
        for (int k = 0; k < 3; ++k)
            if (tris_[nb].adj[k] == oldt) tris_[nb].adj[k] = newt;
    };
    fix_adj(o_u_vo, o, t);
    fix_adj(twt, t, o);
    // tut stays adjacent to t, o_vo_w stays adjacent to o.
    vert2tri_[vt] = t;
    vert2tri_[u] = t;
    vert2tri_[vo] = t;
    vert2tri_[w] = o;
}

void DelaunayTriangulation::insert_constraint(int a, int b) {
    int j = -1;
    if (find_edge(a, b, j) >= 0 || find_edge(b, a, j) >= 0) {
        constrained_[ordered(a, b)] = true;
        return;
    }
    const Vec2 pa = pts_[a], pb = pts_[b];

    // Collect the run of edges crossing segment (a,b), starting from the
    // triangle in a's fan whose opposite edge is crossed.
    std::deque<std::pair<int, int>> crossing; // (triangle, edge index)
    {
        const int start = vert2tri_[a];
        int t = start, entry = -1, jentry = -1;
        for (int guard = 0; guard < 1 << 20 && entry < 0; ++guard) {
            const Tri& tr = tris_[t];
            int ia = -1;
            for (int k = 0; k < 3; ++k)
                if (tr.v[k] == a) ia = k;
            const int u = tr.v[(ia + 1) % 3], w = tr.v[(ia + 2) % 3];
            if (segments_cross(pa, pb, pts_[u], pts_[w], scale_)) {
                entry = t;
                jentry = ia;
                break;
            }
            const int nxt = tr.adj[(ia + 2) % 3];
            if (nxt < 0 || nxt == start) break;
            t = nxt;
        }
        if (entry < 0)
            throw MeshQualityError("triangulation: constraint recovery failed to start");
        crossing.emplace_back(entry, jentry);
        // March across the strip until a triangle contains b.
        int cur = tris_[entry].adj[jentry];
        int from = entry;
        for (int guard = 0; guard < 1 << 20; ++guard) {
            const Tri& tr = tris_[cur];
            bool hasb = false;
            for (int k = 0; k < 3; ++k)
                if (tr.v[k] == b) hasb = true;
            if (hasb) break;
            int next = -1, jn = -1;
            for (int k = 0; k < 3; ++k) {
                if (tr.adj[k] == from) continue;
                const int u = tr.v[(k + 1) % 3], w = tr.v[(k + 2) % 3];
                if (segments_cross(pa, pb, pts_[u], pts_[w], scale_)) {
                    next = tr.adj[k];
                    jn = k;
                    break;
                }
            }
            if (next < 0)
                throw MeshQualityError("triangulation: constraint march failed");
            crossing.emplace_back(cur, jn);
            from = cur;
            cur = next;
        }
    }

    // Sloan: flip crossing edges; re-queue when the quad is not convex.
    std::deque<std::pair<int, int>> queue;
    for (auto& [t, k] : crossing)
        queue.emplace_back(tris_[t].v[(k + 1) % 3], tris_[t].v[(k + 2) % 3]);
    int stall = 0;
    while (!queue.empty()) {
        auto [u, w] = queue.front();
        queue.pop_front();
        int je = -1;
        const int te = find_edge(u, w, je);
        if (te < 0) continue; // edge vanished in an earlier flip
        if (!segments_cross(pa, pb, pts_[u], pts_[w], scale_)) continue;
        const int o = tris_[te].adj[je];
        if (o < 0) continue;
        const int vt = tris_[te].v[je];
        int jo = -1;
        for (int k = 0; k < 3; ++k)
            if (tris_[o].v[(k + 1) % 3] == w && tris_[o].v[(k + 2) % 3] == u) jo = k;
        const int vo = tris_[o].v[jo];
        // The flip is valid only for a strictly convex quad (u, vo, w, vt)...
        const bool convex = orient(pts_[vt], pts_[u], pts_[vo], scale_) > 0 &&
                            orient(pts_[vo], pts_[w], pts_[vt], scale_) > 0;
        if (!convex) {
            queue.emplace_back(u, w);
            if (++stall > static_cast<int>(queue.size()) * 8 + 64)
                throw MeshQualityError("triangulation: constraint flips stalled");
            continue;
        }
        stall = 0;
        flip(te, je);
        if (segments_cross(pa, pb, pts_[vt], pts_[vo], scale_))
            queue.emplace_back(vt, vo);
    }

    int jchk = -1;
    if (find_edge(a, b, jchk) < 0 && find_edge(b, a, jchk) < 0)
        throw MeshQualityError("triangulation: constraint not recovered");
    constrained_[ordered(a, b)] = true;
}

void DelaunayTriangulation::legalize_all() {
    for (int pass = 0; pass < 64; ++pass) {
        bool flipped = false;
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (!tris_[t].alive) continue;
            for (int j = 0; j < 3; ++j) {
                const int o = tris_[t].adj[j];
                if (o < 0 || !tris_[o].alive) continue;
                const int u = tris_[t].v[(j + 1) % 3], w = tris_[t].v[(j + 2) % 3];
                if (edge_constrained(u, w)) continue;
                int jo = -1;
                for (int k = 0; k < 3; ++k)
                    if (tris_[o].v[(k + 1) % 3] == w && tris_[o].v[(k + 2) % 3] == u) jo = k;
                if (jo < 0) continue;
                const int vo = tris_[o].v[jo];
                const int vt = tris_[t].v[j];
                if (!in_circumcircle(tris_[t], pts_[vo])) continue;
                const bool convex = orient(pts_[vt], pts_[u], pts_[vo], scale_) > 0 &&
                                    orient(pts_[vo], pts_[w], pts_[vt], scale_) > 0;
                if (!convex) continue;
                flip(t, j);
                flipped = true;
                break;
            }
        }
        if (!flipped) return;
    }
}

void DelaunayTriangulation::classify_exterior() {
    for (auto& t : tris_)
        t.exterior = false;
    std::queue<int> q;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
        if (!tris_[t].alive) continue;
        for (int j = 0; j < 3; ++j)
            if (tris_[t].v[j] < 3) {
                tris_[t].exterior = true;
                q.push(t);
                break;
            }
    }
    while (!q.empty()) {
        const int t = q.front();
        q.pop();
        for (int j = 0; j < 3; ++j) {
            const int nb = tris_[t].adj[j];
            if (nb < 0 || !tris_[nb].alive || tris_[nb].exterior) continue;
            const int u = tris_[t].v[(j + 1) % 3], w = tris_[t].v[(j + 2) % 3];
            if (edge_constrained(u, w)) continue;
            tris_[nb].exterior = true;
            q.push(nb);
        }
    }
}

void DelaunayTriangulation::extract(std::vector<Vec2>& points, std::vector<ExtractedTri>& tris,
                                    std::vector<int>& vertex_map) const {
    vertex_map.assign(pts_.size(), -1);
    points.clear();
    tris.clear();
    for (const auto& t : tris_) {
        if (!t.alive || t.exterior) continue;
        ExtractedTri et{};
        for (int j = 0; j < 3; ++j) {
            const int v = t.v[j];
            if (vertex_map[v] < 0) {
                vertex_map[v] = static_cast<int>(points.size());
                points.push_back(pts_[v]);
            }
            et.v[j] = vertex_map[v];
        }
        tris.push_back(et);
    }
}

} // namespace porescale::detail
