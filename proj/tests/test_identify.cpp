#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "porescale/errors.hpp"
#include "porescale/identify.hpp"
#include "porescale/mesh.hpp"
#include "porescale/stokes.hpp"
#include "porescale/transport.hpp"
#include "support/testutil.hpp"

using namespace porescale;

namespace {

const Mesh& tiny_mesh() {
    static const Mesh mesh = triangulate(build_geometry(testutil::small_geometry()), 0.1);
    return mesh;
}

const FlowField& tiny_flow() {
    static const FlowField flow = solve_stokes(tiny_mesh(), FlowBCs{});
    return flow;
}

SolverContext& tiny_ctx() {
    static SolverContext ctx = [] {
        TransportParams base;
        base.pe = 10.0;
        base.isotherm = Isotherm::henry(0.005, 0.05);
        base.tau = 0.1;
        base.t_end = 40.0;
        return SolverContext(tiny_mesh(), tiny_flow(), base, 2);
    }();
    return ctx;
}

CurveBank& shared_bank() {
    static CurveBank bank(tiny_ctx());
    return bank;
}

const ParamPoint kGenerator{0.005, 0.05};
const FeasibleBox kBox{0.0, 0.01, 0.0, 0.1};

} // namespace

TEST_CASE("synthesize: exact data reproduces the model curve bitwise") {
    const Measurement meas = synthesize_measurement(tiny_ctx(), kGenerator, 0.0, 3);
    const BreakthroughCurve& curve = shared_bank().at(kGenerator);
    REQUIRE(meas.values.size() == curve.values.size());
    CHECK(meas.values == curve.values);
    CHECK(residual(curve, meas) == 0.0);
}

TEST_CASE("synthesize: noise amplitude and moments") {
    const Measurement clean = synthesize_measurement(tiny_ctx(), kGenerator, 0.0, 11);
    const Measurement noisy = synthesize_measurement(tiny_ctx(), kGenerator, 0.01, 11);
    REQUIRE(noisy.values.size() == 400);
    double max_dev = 0.0, var = 0.0;
    for (std::size_t k = 0; k < noisy.values.size(); ++k) {
        const double d = noisy.values[k] - clean.values[k];
        max_dev = std::max(max_dev, std::abs(d));
        var += d * d;
    }
    var /= static_cast<double>(noisy.values.size());
    CHECK(max_dev <= 0.01);
    // Uniform(-1,1): variance delta^2 / 3, Chebyshev-safe band for N = 400.
    CHECK(var >= 0.8 * 0.01 * 0.01 / 3.0);
    CHECK(var <= 1.2 * 0.01 * 0.01 / 3.0);

    const Measurement again = synthesize_measurement(tiny_ctx(), kGenerator, 0.01, 11);
    CHECK(again.values == noisy.values);
    const Measurement other = synthesize_measurement(tiny_ctx(), kGenerator, 0.01, 12);
    CHECK(other.values != noisy.values);
}

TEST_CASE("residual: constant offset integrates exactly") {
    BreakthroughCurve curve;
    Measurement meas;
    meas.delta = 0.0;
    const int n = 400;
    const double tau = 0.1;
    for (int k = 1; k <= n; ++k) {
        curve.times.push_back(k * tau);
        curve.values.push_back(0.3);
        meas.times.push_back(k * tau);
        meas.values.push_back(0.3 + 0.1);
    }
    CHECK(residual(curve, meas) == doctest::Approx(0.1 * 0.1 * 40.0).epsilon(1e-12));
    CHECK(residual(curve, meas, 40.0) == residual(curve, meas));
    CHECK(residual(curve, meas, 20.0) == doctest::Approx(0.1 * 0.1 * 20.0).epsilon(1e-12));

    Measurement shifted = meas;
    shifted.times[5] += 0.05;
    CHECK_THROWS_AS(residual(curve, shifted), GridMismatchError);
}

TEST_CASE("admissible threshold arithmetic") {
    CHECK(admissible_threshold(1.02625, 0.01, 40.0) ==
          doctest::Approx(1.3683333333e-3).epsilon(1e-9));
    CHECK(admissible_threshold(1.21, 0.05, 40.0) ==
          doctest::Approx(4.0333333333e-2).epsilon(1e-9));
    CHECK(admissible_threshold(1.5, 0.0, 40.0) == 0.0);
    CHECK_THROWS_AS(admissible_threshold(1.0, 0.01, 40.0), ConfigError);
    CHECK_THROWS_AS(admissible_threshold(1.2, -0.01, 40.0), ConfigError);
}

TEST_CASE("grid sweep with exact data recovers the generator exactly") {
    const Measurement meas = synthesize_measurement(tiny_ctx(), kGenerator, 0.0, 1);
    const ResidualSurface surf = grid_sweep(shared_bank(), kBox, 5, 5, meas);
    REQUIRE(surf.points.size() == 25);
    const AdmissibleSet set = classify(surf.points, 1.02625, 0.0, 40.0);
    CHECK(set.points[set.minimizer].da_a == 0.005);
    CHECK(set.points[set.minimizer].da_d == 0.05);
    CHECK(set.points[set.minimizer].j <= 1e-14);
    CHECK(set.points[set.minimizer].j == 0.0);
    int zeros = 0;
    for (const auto& p : set.points)
        if (p.j == 0.0) ++zeros;
    CHECK(zeros == 1);
    // delta = 0: only exact matches are admissible.
    CHECK(set.n_admissible() == 1);
}

TEST_CASE("2x2 grid picks the corner with the smallest residual") {
    const Measurement meas = synthesize_measurement(tiny_ctx(), kGenerator, 0.0, 1);
    const ResidualSurface surf = grid_sweep(shared_bank(), kBox, 2, 2, meas);
    REQUIRE(surf.points.size() == 4);
    const AdmissibleSet set = classify(surf.points, 1.1, 0.0, 40.0);
    double jmin = 1e300;
    for (const auto& p : surf.points)
        jmin = std::min(jmin, p.j);
    CHECK(set.points[set.minimizer].j == jmin);
}

TEST_CASE("sobol sampling maps into the box and hits the center first") {
    const auto pts = sobol_sample(kBox, 9);
    REQUIRE(pts.size() == 9);
    CHECK(pts[0].da_a == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(pts[0].da_d == doctest::Approx(0.05).epsilon(1e-15));
    for (const auto& p : pts)
        CHECK(kBox.contains(p));
}

TEST_CASE("random search with exact data admits only exact matches") {
    const Measurement meas = synthesize_measurement(tiny_ctx(), kGenerator, 0.0, 1);
    const AdmissibleSet set = random_search(shared_bank(), kBox, 16, meas, 1.02625);
    // The first Sobol point is the box center, which is the generator here.
    CHECK(set.n_admissible() == 1);
    CHECK(set.points[set.minimizer].da_a == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(set.points[set.minimizer].j == 0.0);
}

TEST_CASE("admissible sets are nested in gamma and delta") {
    std::vector<EvaluatedPoint> pts;
    for (int i = 0; i < 50; ++i)
        pts.push_back({0.001 * i, 0.002 * i, 4e-5 * i});
    const AdmissibleSet tight = classify(pts, 1.02625, 0.01, 40.0);
    const AdmissibleSet loose = classify(pts, 1.21, 0.01, 40.0);
    const AdmissibleSet louder = classify(pts, 1.02625, 0.02, 40.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (tight.admissible[i]) {
            CHECK(loose.admissible[i]);
            CHECK(louder.admissible[i]);
        }
    }
    CHECK(tight.n_admissible() < loose.n_admissible());
}

TEST_CASE("residual at the generator concentrates near the noise energy") {
    const double delta = 0.01;
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        const Measurement meas = synthesize_measurement(tiny_ctx(), kGenerator, delta, seed);
        const double j = residual(shared_bank().at(kGenerator), meas);
        CHECK(j >= 0.5 * delta * delta * 40.0 / 3.0);
        CHECK(j <= 1.5 * delta * delta * 40.0 / 3.0);
    }
}

TEST_CASE("bank caches curves and is scheduling-independent") {
    SolverContext& ctx = tiny_ctx();
    const auto pts = sobol_sample(kBox, 8);

    CurveBank serial_bank(ctx);
    const int saved_workers = ctx.workers;
    ctx.workers = 1;
    const auto serial = serial_bank.evaluate(pts);
    ctx.workers = 4;
    CurveBank parallel_bank(ctx);
    const auto parallel = parallel_bank.evaluate(pts);
    ctx.workers = saved_workers;

    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i)
        CHECK(serial[i]->values == parallel[i]->values);

    const std::size_t before = serial_bank.size();
    serial_bank.evaluate(pts);
    CHECK(serial_bank.size() == before);
}

TEST_CASE("single-stage plan equals plain random search") {
    const Measurement meas = synthesize_measurement(tiny_ctx(), kGenerator, 0.01, 5);
    StagePlan plan;
    plan.initial_box = kBox;
    Stage st;
    st.box = kBox;
    st.strategy = SampleStrategy::Sobol;
    st.n = 32;
    plan.stages = {st};
    const auto staged = multistage_identify(shared_bank(), plan, meas, 1.21);
    const AdmissibleSet direct = random_search(shared_bank(), kBox, 32, meas, 1.21);
    REQUIRE(staged.size() == 1);
    REQUIRE(staged[0].set.points.size() == direct.points.size());
    for (std::size_t i = 0; i < direct.points.size(); ++i) {
        CHECK(staged[0].set.points[i].j == direct.points[i].j);
        CHECK(staged[0].set.admissible[i] == direct.admissible[i]);
    }
}

TEST_CASE("multistage auto box shrinks within the initial box") {
    const Measurement meas = synthesize_measurement(tiny_ctx(), kGenerator, 0.01, 5);
    StagePlan plan;
    plan.initial_box = kBox;
    Stage s1;
    s1.box = kBox;
    s1.n = 64;
    Stage s2; // AUTO box
    s2.n = 32;
    plan.stages = {s1, s2};
    const auto results = multistage_identify(shared_bank(), plan, meas, 1.21);
    REQUIRE(results.size() == 2);
    const FeasibleBox& b2 = results[1].box;
    CHECK(b2.da_a_lo >= kBox.da_a_lo);
    CHECK(b2.da_a_hi <= kBox.da_a_hi);
    CHECK(b2.da_d_lo >= kBox.da_d_lo);
    CHECK(b2.da_d_hi <= kBox.da_d_hi);
    CHECK(b2.area() < kBox.area());
    CHECK(results[1].set.n_admissible() > 0);
    for (const auto& p : results[1].set.points)
        CHECK(b2.contains({p.da_a, p.da_d}));
}

TEST_CASE("multistage raises when a stage admits nothing") {
    // Tiny noise floor and a box far from the generator.
    const Measurement meas = synthesize_measurement(tiny_ctx(), kGenerator, 1e-4, 5);
    StagePlan plan;
    plan.initial_box = kBox;
    Stage s1;
    s1.box = FeasibleBox{0.009, 0.01, 0.001, 0.002};
    s1.n = 8;
    plan.stages = {s1};
    CHECK_THROWS_AS(multistage_identify(shared_bank(), plan, meas, 1.02625),
                    EmptyAdmissibleError);
}

TEST_CASE("stage t_cut rescales the threshold") {
    const Measurement meas = synthesize_measurement(tiny_ctx(), kGenerator, 0.01, 5);
    StagePlan plan;
    plan.initial_box = kBox;
    Stage s1;
    s1.box = kBox;
    s1.n = 32;
    s1.t_cut = 15.0;
    plan.stages = {s1};
    const auto results = multistage_identify(shared_bank(), plan, meas, 1.21);
    CHECK(results[0].set.threshold ==
          doctest::Approx(admissible_threshold(1.21, 0.01, 15.0)).epsilon(1e-13));
}

TEST_CASE("multi-realization: single realization intersects with itself") {
    const auto pts = sobol_sample(kBox, 32);
    const auto mr = multi_realization(shared_bank(), kGenerator, 0.01, {9}, pts, 1.21);
    REQUIRE(mr.sets.size() == 1);
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < mr.sets[0].points.size(); ++i)
        if (mr.sets[0].admissible[i]) expect.push_back(i);
    CHECK(mr.intersection == expect);
}

TEST_CASE("multi-realization: intersection is contained in every set") {
    const auto pts = sobol_sample(kBox, 64);
    const auto mr =
        multi_realization(shared_bank(), kGenerator, 0.01, {1, 2, 3}, pts, 1.21);
    REQUIRE(mr.sets.size() == 3);
    REQUIRE(mr.minimizers.size() == 3);
    std::size_t min_count = static_cast<std::size_t>(-1);
    for (const auto& s : mr.sets)
        min_count = std::min(min_count, s.n_admissible());
    CHECK(mr.intersection.size() <= min_count);
    for (std::size_t i : mr.intersection)
        for (const auto& s : mr.sets)
            CHECK(s.admissible[i]);
    CHECK(mr.intersection_empty == mr.intersection.empty());
}

TEST_CASE("measurement validation") {
    Measurement meas;
    meas.times = {0.1, 0.2, 0.35};
    meas.values = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(meas.validate(), GridMismatchError);
    meas.times = {0.1, 0.2, 0.3};
    CHECK_NOTHROW(meas.validate());
    meas.values[1] = std::nan("");
    CHECK_THROWS_AS(meas.validate(), GridMismatchError);
}

TEST_CASE("feasible box validation and containment") {
    CHECK_THROWS_AS((FeasibleBox{-0.1, 0.1, 0.0, 0.1}.validate()), ConfigError);
    CHECK_THROWS_AS((FeasibleBox{0.2, 0.1, 0.0, 0.1}.validate()), ConfigError);
    CHECK(kBox.contains({0.005, 0.05}));
    CHECK(!kBox.contains({0.02, 0.05}));
}

#include "porescale/contour.hpp"

TEST_CASE("isolines of a linear field sit exactly on the level") {
    const std::vector<double> xs = {0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> ys = {0.0, 1.0, 2.0};
    std::vector<double> vals(xs.size() * ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ys.size(); ++j)
            vals[i * ys.size() + j] = xs[i];
    const auto lines = extract_isolines(xs, ys, vals, {1.5});
    REQUIRE(lines.size() == 1);
    REQUIRE(lines[0].points.size() >= 3);
    double ymin = 1e300, ymax = -1e300;
    for (const auto& p : lines[0].points) {
        CHECK(p.x == doctest::Approx(1.5).epsilon(1e-14));
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    CHECK(ymin == doctest::Approx(0.0));
    CHECK(ymax == doctest::Approx(2.0));
}

TEST_CASE("isolines of a radial field form a closed loop at the right radius") {
    const int n = 41;
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i)
        xs[i] = ys[i] = -1.0 + 2.0 * i / (n - 1);
    std::vector<double> vals(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            vals[static_cast<std::size_t>(i) * n + j] = xs[i] * xs[i] + ys[j] * ys[j];
    const auto lines = extract_isolines(xs, ys, vals, {0.25});
    REQUIRE(lines.size() == 1);
    const auto& loop = lines[0].points;
    REQUIRE(loop.size() > 20);
    CHECK(loop.front().x == doctest::Approx(loop.back().x).epsilon(1e-12));
    CHECK(loop.front().y == doctest::Approx(loop.back().y).epsilon(1e-12));
    for (const auto& p : loop)
        CHECK(std::hypot(p.x, p.y) == doctest::Approx(0.5).epsilon(0.02));
}
