#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "porescale/errors.hpp"
#include "porescale/geometry.hpp"

using namespace porescale;

TEST_CASE("default geometry carries ten alternating half-disk loops") {
    const PlanarDomain dom = build_geometry(GeometryConfig{});
    REQUIRE(dom.circles.size() == 10);
    int bottom = 0, top = 0;
    for (const auto& c : dom.circles)
        (c.wall_bottom ? bottom : top) += 1;
    CHECK(bottom == 5);
    CHECK(top == 5);

    std::set<int> arc_ids;
    for (const auto& s : dom.segments)
        if (s.tag == BoundaryTag::Surface) {
            REQUIRE(s.circle >= 0);
            arc_ids.insert(s.circle);
        }
    CHECK(arc_ids.size() == 10);

    // Closed loop: each segment ends where the next begins, and the loop is
    // CCW (positive area).
    for (std::size_t i = 0; i < dom.segments.size(); ++i) {
        const auto& cur = dom.segments[i];
        const auto& nxt = dom.segments[(i + 1) % dom.segments.size()];
        CHECK(cur.b.x == nxt.a.x);
        CHECK(cur.b.y == nxt.a.y);
    }
    const double expected = 17.5 * 1.0 - 10.0 * std::numbers::pi * 0.4 * 0.4 / 2.0;
    CHECK(dom.area() == doctest::Approx(expected).epsilon(2e-3));
    CHECK(dom.area() > expected); // inscribed chords remove less than the disks
}

TEST_CASE("zero obstacles give a plain rectangle with 4 labeled sides") {
    GeometryConfig cfg;
    cfg.obstacle_count = 0;
    const PlanarDomain dom = build_geometry(cfg);
    REQUIRE(dom.segments.size() == 4);
    CHECK(dom.segments[0].tag == BoundaryTag::Symmetry);
    CHECK(dom.segments[1].tag == BoundaryTag::Outlet);
    CHECK(dom.segments[2].tag == BoundaryTag::Symmetry);
    CHECK(dom.segments[3].tag == BoundaryTag::Inlet);
    CHECK(dom.area() == doctest::Approx(17.5).epsilon(1e-14));
}

TEST_CASE("minimum gap between consecutive obstacle surfaces") {
    // Consecutive centers sit (pitch, height) apart on opposite walls; the
    // surface gap is that distance minus two radii.
    const double expected = std::sqrt(1.5 * 1.5 + 1.0 * 1.0) - 0.8;
    const PlanarDomain dom = build_geometry(GeometryConfig{});
    double min_gap = 1e300;
    std::vector<ObstacleCircle> by_x = dom.circles;
    std::sort(by_x.begin(), by_x.end(),
              [](const ObstacleCircle& a, const ObstacleCircle& b) {
                  return a.center.x < b.center.x;
              });
    for (std::size_t k = 0; k + 1 < by_x.size(); ++k) {
        const double d = norm(by_x[k + 1].center - by_x[k].center);
        min_gap = std::min(min_gap, d - by_x[k].radius - by_x[k + 1].radius);
    }
    CHECK(min_gap == doctest::Approx(expected).epsilon(1e-12));
    CHECK(min_gap == doctest::Approx(1.0027756377319946).epsilon(1e-12));
}

TEST_CASE("arc endpoints lie exactly on their circle and on the wall") {
    const PlanarDomain dom = build_geometry(GeometryConfig{});
    for (const auto& s : dom.segments) {
        if (s.tag != BoundaryTag::Surface) continue;
        const auto& c = dom.circles[s.circle];
        CHECK(std::abs(norm(s.a - c.center) - c.radius) <= 1e-12);
        CHECK(std::abs(norm(s.b - c.center) - c.radius) <= 1e-12);
    }
}

TEST_CASE("overlapping obstacles are rejected") {
    GeometryConfig cfg;
    cfg.obstacle_radius = 0.95; // reaches across the channel
    CHECK_THROWS_AS(build_geometry(cfg), OverlapError);

    GeometryConfig tight;
    tight.height = 0.2;
    tight.obstacle_radius = 0.15;
    tight.obstacle_pitch = 0.2; // sqrt(pitch^2 + h^2) = 0.283 < 2r = 0.3
    CHECK_THROWS_AS(build_geometry(tight), OverlapError);
}

TEST_CASE("obstacles outside the channel are rejected") {
    GeometryConfig cfg;
    cfg.first_center_x1 = 0.2; // radius 0.4 pokes past x1 = 0
    CHECK_THROWS_AS(build_geometry(cfg), OutOfDomainError);

    GeometryConfig far;
    far.first_center_x1 = 4.0; // last center at 17.5, + r > length
    CHECK_THROWS_AS(build_geometry(far), OutOfDomainError);
}

TEST_CASE("nondegenerate pitch passes the staggered overlap bound") {
    // pitch^2 >= 4r^2 - h^2 always holds at the defaults (rhs negative).
    GeometryConfig cfg;
    CHECK(cfg.obstacle_pitch * cfg.obstacle_pitch >
          4.0 * cfg.obstacle_radius * cfg.obstacle_radius - cfg.height * cfg.height);
    CHECK_NOTHROW(build_geometry(cfg));
}
