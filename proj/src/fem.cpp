#include "porescale/fem.hpp"

#include <algorithm>
#include <cmath>

#include "porescale/errors.hpp"

namespace porescale {

EdgeTable::EdgeTable(const Mesh& mesh) {
    for (const auto& tr : mesh.triangles) {
        for (int j = 0; j < 3; ++j) {
            const auto key = std::minmax(tr[(j + 1) % 3], tr[(j + 2) % 3]);
            if (index_.emplace(key, static_cast<int>(edges_.size())).second)
                edges_.push_back(key);
        }
    }
}

int EdgeTable::index(int a, int b) const {
    const auto it = index_.find(std::minmax(a, b));
    if (it == index_.end())
        throw FormatError("edge table: unknown edge");
    return it->second;
}

std::array<int, 6> EdgeTable::p2_nodes(const Mesh& mesh, std::size_t t) const {
    const auto& tr = mesh.triangles[t];
    const int nv = static_cast<int>(mesh.n_vertices());
    return {tr[0],
            tr[1],
            tr[2],
            nv + index(tr[1], tr[2]),
            nv + index(tr[2], tr[0]),
            nv + index(tr[0], tr[1])};
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(mesh) {
    double x1 = mesh.vertices[0].x, y1 = mesh.vertices[0].y;
    x0_ = x1;
    y0_ = y1;
    for (const auto& v : mesh.vertices) {
        x0_ = std::min(x0_, v.x);
        y0_ = std::min(y0_, v.y);
        x1 = std::max(x1, v.x);
        y1 = std::max(y1, v.y);
    }
    cell_ = std::max(mesh.max_edge_length(), 1e-12);
    nx_ = std::max(1, static_cast<int>((x1 - x0_) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((y1 - y0_) / cell_) + 1);
    bins_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        double tx0 = mesh.vertices[tr[0]].x, tx1 = tx0;
        double ty0 = mesh.vertices[tr[0]].y, ty1 = ty0;
        for (int j = 1; j < 3; ++j) {
            tx0 = std::min(tx0, mesh.vertices[tr[j]].x);
            tx1 = std::max(tx1, mesh.vertices[tr[j]].x);
            ty0 = std::min(ty0, mesh.vertices[tr[j]].y);
            ty1 = std::max(ty1, mesh.vertices[tr[j]].y);
        }
        const int i0 = std::clamp(static_cast<int>((tx0 - x0_) / cell_), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((tx1 - x0_) / cell_), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((ty0 - y0_) / cell_), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((ty1 - y0_) / cell_), 0, ny_ - 1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
                bins_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(t));
    }
}

std::optional<std::array<double, 3>> PointLocator::locate(Vec2 p, int& tri) const {
    const int i = std::clamp(static_cast<int>((p.x - x0_) / cell_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((p.y - y0_) / cell_), 0, ny_ - 1);
    for (int t : bins_[static_cast<std::size_t>(j) * nx_ + i]) {
        const auto& tr = mesh_.triangles[t];
        const Vec2 a = mesh_.vertices[tr[0]], b = mesh_.vertices[tr[1]], c = mesh_.vertices[tr[2]];
        const double d = cross(b - a, c - a);
        const double l1 = cross(p - a, c - a) / d;
        const double l2 = cross(b - a, p - a) / d;
        const double l0 = 1.0 - l1 - l2;
        const double eps = 1e-10;
        if (l0 >= -eps && l1 >= -eps && l2 >= -eps) {
            tri = t;
            return std::array<double, 3>{l0, l1, l2};
        }
    }
    return std::nullopt;
}

} // namespace porescale
