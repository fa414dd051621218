#include "porescale/contour.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

namespace porescale {

namespace {

// Quantized endpoint key so float-identical junction points chain up.
std::pair<std::int64_t, std::int64_t> key_of(Vec2 p, double qx, double qy) {
    return {static_cast<std::int64_t>(std::llround(p.x / qx * 1048576.0)),
            static_cast<std::int64_t>(std::llround(p.y / qy * 1048576.0))};
}

} // namespace

std::vector<ContourPolyline> extract_isolines(const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              const std::vector<double>& values,
                                              const std::vector<double>& levels) {
    const int n1 = static_cast<int>(xs.size());
    const int n2 = static_cast<int>(ys.size());
    if (values.size() != static_cast<std::size_t>(n1) * n2)
        throw std::invalid_argument("extract_isolines: lattice size mismatch");
    auto val = [&](int i, int j) { return values[static_cast<std::size_t>(i) * n2 + j]; };

    const double qx = std::max(std::abs(xs.back() - xs.front()), 1e-300);
    const double qy = std::max(std::abs(ys.back() - ys.front()), 1e-300);

    std::vector<ContourPolyline> out;
    for (double level : levels) {
        // Collect one segment list per level, then chain shared endpoints.
        std::vector<std::pair<Vec2, Vec2>> segments;
        auto interp = [&](double xa, double ya, double va, double xb, double yb, double vb) {
            const double t = (level - va) / (vb - va);
            return Vec2{xa + t * (xb - xa), ya + t * (yb - ya)};
        };
        for (int i = 0; i + 1 < n1; ++i) {
            for (int j = 0; j + 1 < n2; ++j) {
                // corners: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1)
                const double v[4] = {val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)};
                const double cx[4] = {xs[i], xs[i + 1], xs[i + 1], xs[i]};
                const double cy[4] = {ys[j], ys[j], ys[j + 1], ys[j + 1]};
                int mask = 0;
                for (int c = 0; c < 4; ++c)
                    if (v[c] >= level) mask |= 1 << c;
                if (mask == 0 || mask == 15) continue;
                // Crossing points on the 4 edges (c -> c+1).
                Vec2 pt[4];
                bool has[4] = {};
                for (int c = 0; c < 4; ++c) {
                    const int d = (c + 1) % 4;
                    if ((v[c] >= level) != (v[d] >= level)) {
                        pt[c] = interp(cx[c], cy[c], v[c], cx[d], cy[d], v[d]);
                        has[c] = true;
                    }
                }
                int crossing[4], nc = 0;
                for (int c = 0; c < 4; ++c)
                    if (has[c]) crossing[nc++] = c;
                if (nc == 2) {
                    segments.emplace_back(pt[crossing[0]], pt[crossing[1]]);
                } else if (nc == 4) {
                    // Saddle: split by the cell-center value.
                    const double center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    if ((center >= level) == (v[0] >= level)) {
                        segments.emplace_back(pt[0], pt[1]);
                        segments.emplace_back(pt[2], pt[3]);
                    } else {
                        segments.emplace_back(pt[3], pt[0]);
                        segments.emplace_back(pt[1], pt[2]);
                    }
                }
            }
        }

        // Chain segments into polylines.
        std::multimap<std::pair<std::int64_t, std::int64_t>, std::size_t> ends;
        for (std::size_t s = 0; s < segments.size(); ++s) {
            ends.emplace(key_of(segments[s].first, qx, qy), s);
            ends.emplace(key_of(segments[s].second, qx, qy), s);
        }
        std::vector<char> used(segments.size(), 0);
        for (std::size_t s = 0; s < segments.size(); ++s) {
            if (used[s]) continue;
            used[s] = 1;
            std::vector<Vec2> line{segments[s].first, segments[s].second};
            // Extend forward from the back, then from the front.
            for (int dir = 0; dir < 2; ++dir) {
                for (;;) {
                    const Vec2 tip = dir == 0 ? line.back() : line.front();
                    const auto k = key_of(tip, qx, qy);
                    std::size_t next = segments.size();
                    for (auto it = ends.lower_bound(k); it != ends.upper_bound(k); ++it)
                        if (!used[it->second]) {
                            next = it->second;
                            break;
                        }
                    if (next == segments.size()) break;
                    used[next] = 1;
                    const auto& seg = segments[next];
                    const Vec2 add = key_of(seg.first, qx, qy) == k ? seg.second : seg.first;
                    if (dir == 0)
                        line.push_back(add);
                    else
                        line.insert(line.begin(), add);
                }
            }
            out.push_back({level, std::move(line)});
        }
    }
    return out;
}

} // namespace porescale
