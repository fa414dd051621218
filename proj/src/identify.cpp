#include "porescale/identify.hpp"

#include <algorithm>
#include <cmath>

#include "porescale/errors.hpp"
#include "porescale/parallel.hpp"
#include "porescale/rng.hpp"
#include "porescale/sobol.hpp"

namespace porescale {

void Measurement::validate() const {
    if (times.size() != values.size() || times.empty())
        throw GridMismatchError("measurement: times and values must be equal-length, non-empty");
    const double step = times.front();
    if (!(step > 0.0))
        throw GridMismatchError("measurement: times must start at tau > 0");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (std::abs(times[k] - (k + 1) * step) > 1e-9 * std::max(1.0, times[k]))
            throw GridMismatchError("measurement: times are not a tau-uniform grid");
        if (!std::isfinite(values[k]))
            throw GridMismatchError("measurement: non-finite value");
    }
}

double Measurement::tau() const {
    if (times.empty())
        throw GridMismatchError("measurement: empty");
    return times.front();
}

void FeasibleBox::validate() const {
    if (!(da_a_lo <= da_a_hi) || !(da_d_lo <= da_d_hi) || da_a_lo < 0.0 || da_d_lo < 0.0)
        throw ConfigError("feasible box: need 0 <= lo <= hi on both axes");
}

bool FeasibleBox::contains(ParamPoint p) const {
    return p.da_a >= da_a_lo && p.da_a <= da_a_hi && p.da_d >= da_d_lo && p.da_d <= da_d_hi;
}

std::size_t AdmissibleSet::n_admissible() const {
    std::size_t n = 0;
    for (char a : admissible)
        n += a ? 1 : 0;
    return n;
}

FeasibleBox AdmissibleSet::admissible_bounding_box() const {
    FeasibleBox box{1e300, -1e300, 1e300, -1e300};
    bool any = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!admissible[i]) continue;
        any = true;
        box.da_a_lo = std::min(box.da_a_lo, points[i].da_a);
        box.da_a_hi = std::max(box.da_a_hi, points[i].da_a);
        box.da_d_lo = std::min(box.da_d_lo, points[i].da_d);
        box.da_d_hi = std::max(box.da_d_hi, points[i].da_d);
    }
    if (!any)
        throw EmptyAdmissibleError("admissible set is empty");
    return box;
}

void StagePlan::validate() const {
    initial_box.validate();
    if (stages.empty())
        throw ConfigError("stage plan: needs at least one stage");
    for (const auto& s : stages) {
        if (s.box) s.box->validate();
        if (s.strategy == SampleStrategy::Sobol && s.n < 1)
            throw ConfigError("stage plan: Sobol stage needs n >= 1");
        if (s.strategy == SampleStrategy::Grid && (s.n1 < 2 || s.n2 < 2))
            throw ConfigError("stage plan: grid stage needs n1, n2 >= 2");
        if (s.t_cut && !(*s.t_cut > 0.0))
            throw ConfigError("stage plan: t_cut must be positive");
    }
    if (!stages.front().box)
        throw ConfigError("stage plan: first stage cannot use an AUTO box");
}

SolverContext::SolverContext(const Mesh& mesh_, const FlowField& flow_,
                             const TransportParams& base_, int workers_)
    : mesh(mesh_), flow(flow_), base(base_),
      ops(assemble_transport(mesh_, flow_, base_.pe)), workers(std::max(1, workers_)) {
    base.validate();
}

const BreakthroughCurve& CurveBank::at(ParamPoint p) {
    return *evaluate({p}).front();
}

std::vector<const BreakthroughCurve*> CurveBank::evaluate(const std::vector<ParamPoint>& pts) {
    // Resolve cache misses first, then compute them concurrently into
    // index-addressed slots.
    std::vector<ParamPoint> missing;
    for (const auto& p : pts) {
        const auto key = std::make_pair(p.da_a, p.da_d);
        if (!index_.count(key)) {
            index_.emplace(key, store_.size());
            store_.push_back(nullptr);
            missing.push_back(p);
        }
    }
    if (!missing.empty()) {
        std::vector<std::unique_ptr<BreakthroughCurve>> fresh(missing.size());
        SolverContext& ctx = ctx_;
        parallel_for(missing.size(), ctx.workers, [&](std::size_t i) {
            TransportParams params = ctx.base;
            params.isotherm.da_a = missing[i].da_a;
            params.isotherm.da_d = missing[i].da_d;
            fresh[i] = std::make_unique<BreakthroughCurve>(run_transport(ctx.ops, params).curve);
        });
        for (std::size_t i = 0; i < missing.size(); ++i) {
            const auto key = std::make_pair(missing[i].da_a, missing[i].da_d);
            store_[index_.at(key)] = std::move(fresh[i]);
        }
    }
    std::vector<const BreakthroughCurve*> out;
    out.reserve(pts.size());
    for (const auto& p : pts)
        out.push_back(store_[index_.at(std::make_pair(p.da_a, p.da_d))].get());
    return out;
}

double noise_sigma(std::uint64_t seed, int n) {
    return rng::uniform_sym(seed, static_cast<std::uint64_t>(n));
}

Measurement synthesize_measurement(SolverContext& ctx, ParamPoint generator, double delta,
                                   std::uint64_t seed) {
    if (!(delta >= 0.0))
        throw ConfigError("synthesize: delta must be non-negative");
    TransportParams params = ctx.base;
    params.isotherm.da_a = generator.da_a;
    params.isotherm.da_d = generator.da_d;
    const BreakthroughCurve curve = run_transport(ctx.ops, params).curve;

    Measurement meas;
    meas.times = curve.times;
    meas.values = curve.values;
    meas.delta = delta;
    meas.seed = seed;
    if (delta > 0.0)
        for (std::size_t k = 0; k < meas.values.size(); ++k)
            meas.values[k] += delta * noise_sigma(seed, static_cast<int>(k) + 1);
    meas.validate();
    return meas;
}

double residual(const BreakthroughCurve& curve, const Measurement& meas,
                std::optional<double> t_cut) {
    const double cut = t_cut.value_or(meas.t_end());
    if (t_cut && *t_cut > meas.t_end() + 1e-9)
        throw GridMismatchError("residual: t_cut exceeds the measurement horizon");
    const double tau = meas.tau();
    std::size_t n_eff = 0;
    for (std::size_t k = 0; k < meas.times.size(); ++k)
        if (meas.times[k] <= cut + 1e-12) n_eff = k + 1;
    if (curve.times.size() < n_eff)
        throw GridMismatchError("residual: curve shorter than the measurement window");
    double j = 0.0;
    for (std::size_t k = 0; k < n_eff; ++k) {
        if (std::abs(curve.times[k] - meas.times[k]) > 1e-9 * std::max(1.0, meas.times[k]))
            throw GridMismatchError("residual: time grids do not match");
        const double d = curve.values[k] - meas.values[k];
        j += tau * d * d;
    }
    return j;
}

double admissible_threshold(double gamma, double delta, double t_effective) {
    if (!(gamma > 1.0))
        throw ConfigError("admissible_threshold: gamma must exceed 1");
    if (!(delta >= 0.0))
        throw ConfigError("admissible_threshold: delta must be non-negative");
    return gamma * delta * delta * t_effective / 3.0;
}

std::vector<ParamPoint> make_grid_points(const FeasibleBox& box, int n1, int n2) {
    box.validate();
    if (n1 < 2 || n2 < 2)
        throw ConfigError("grid: need n1, n2 >= 2");
    std::vector<ParamPoint> pts;
    pts.reserve(static_cast<std::size_t>(n1) * n2);
    for (int i = 0; i < n1; ++i) {
        const double a = box.da_a_lo + i * (box.da_a_hi - box.da_a_lo) / (n1 - 1);
        for (int j = 0; j < n2; ++j) {
            const double d = box.da_d_lo + j * (box.da_d_hi - box.da_d_lo) / (n2 - 1);
            pts.push_back({a, d});
        }
    }
    return pts;
}

std::vector<ParamPoint> sobol_sample(const FeasibleBox& box, int n) {
    box.validate();
    if (n < 1)
        throw ConfigError("sobol: need n >= 1");
    std::vector<ParamPoint> pts;
    pts.reserve(n);
    for (const auto& [u, v] : sobol2d(static_cast<std::size_t>(n)))
        pts.push_back({box.da_a_lo + u * (box.da_a_hi - box.da_a_lo),
                       box.da_d_lo + v * (box.da_d_hi - box.da_d_lo)});
    return pts;
}

namespace {
std::vector<EvaluatedPoint> evaluate_points(CurveBank& bank, const std::vector<ParamPoint>& pts,
                                            const Measurement& meas,
                                            std::optional<double> t_cut) {
    meas.validate();
    const auto curves = bank.evaluate(pts);
    std::vector<EvaluatedPoint> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        out[i] = {pts[i].da_a, pts[i].da_d, residual(*curves[i], meas, t_cut)};
    return out;
}
} // namespace

ResidualSurface grid_sweep(CurveBank& bank, const FeasibleBox& box, int n1, int n2,
                           const Measurement& meas, std::optional<double> t_cut) {
    ResidualSurface surf;
    surf.box = box;
    surf.n1 = n1;
    surf.n2 = n2;
    surf.points = evaluate_points(bank, make_grid_points(box, n1, n2), meas, t_cut);
    return surf;
}

AdmissibleSet classify(std::vector<EvaluatedPoint> points, double gamma, double delta,
                       double t_effective) {
    AdmissibleSet set;
    set.gamma = gamma;
    set.threshold = admissible_threshold(gamma, delta, t_effective);
    set.points = std::move(points);
    set.admissible.resize(set.points.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < set.points.size(); ++i) {
        set.admissible[i] = set.points[i].j <= set.threshold ? 1 : 0;
        if (set.points[i].j < set.points[best].j) best = i;
    }
    set.minimizer = best;
    return set;
}

AdmissibleSet random_search(CurveBank& bank, const FeasibleBox& box, int n,
                            const Measurement& meas, double gamma,
                            std::optional<double> t_cut) {
    auto evals = evaluate_points(bank, sobol_sample(box, n), meas, t_cut);
    return classify(std::move(evals), gamma, meas.delta, t_cut.value_or(meas.t_end()));
}

namespace {
FeasibleBox auto_box(const AdmissibleSet& prev, const FeasibleBox& clip) {
    FeasibleBox b = prev.admissible_bounding_box();
    const double pad_a = 0.2 * (b.da_a_hi - b.da_a_lo);
    const double pad_d = 0.2 * (b.da_d_hi - b.da_d_lo);
    b.da_a_lo = std::max(clip.da_a_lo, b.da_a_lo - pad_a);
    b.da_a_hi = std::min(clip.da_a_hi, b.da_a_hi + pad_a);
    b.da_d_lo = std::max(clip.da_d_lo, b.da_d_lo - pad_d);
    b.da_d_hi = std::min(clip.da_d_hi, b.da_d_hi + pad_d);
    return b;
}
} // namespace

std::vector<StageResult> multistage_identify(CurveBank& bank, const StagePlan& plan,
                                             const Measurement& meas, double gamma) {
    plan.validate();
    std::vector<StageResult> results;
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        const Stage& stage = plan.stages[s];
        FeasibleBox box;
        if (stage.box)
            box = *stage.box;
        else
            box = auto_box(results.back().set, plan.initial_box);

        std::vector<ParamPoint> pts = stage.strategy == SampleStrategy::Grid
                                          ? make_grid_points(box, stage.n1, stage.n2)
                                          : sobol_sample(box, stage.n);
        auto evals = evaluate_points(bank, pts, meas, stage.t_cut);
        AdmissibleSet set = classify(std::move(evals), gamma, meas.delta,
                                     stage.t_cut.value_or(meas.t_end()));
        if (set.n_admissible() == 0)
            throw EmptyAdmissibleError("multistage: stage " + std::to_string(s + 1) +
                                       " admitted no points (raise gamma or widen the box)");
        results.push_back({box, stage, std::move(set)});
    }
    return results;
}

MultiRealizationResult multi_realization(CurveBank& bank, ParamPoint generator, double delta,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::vector<ParamPoint>& eval_points,
                                         double gamma, std::optional<double> t_cut) {
    if (seeds.empty())
        throw ConfigError("multi_realization: needs at least one seed");
    MultiRealizationResult out;
    // One direct solve for the generator, one per evaluation point; the
    // noise realizations only re-weigh the cached curves.
    std::vector<std::size_t> inter;
    for (std::size_t r = 0; r < seeds.size(); ++r) {
        // Reuse the bank's generator curve through synthesize on the shared
        // context to keep everything on one solver path.
        Measurement meas;
        {
            const BreakthroughCurve& gcurve = bank.at(generator);
            meas.times = gcurve.times;
            meas.values = gcurve.values;
            meas.delta = delta;
            meas.seed = seeds[r];
            if (delta > 0.0)
                for (std::size_t k = 0; k < meas.values.size(); ++k)
                    meas.values[k] += delta * noise_sigma(seeds[r], static_cast<int>(k) + 1);
        }
        auto evals = evaluate_points(bank, eval_points, meas, t_cut);
        AdmissibleSet set =
            classify(std::move(evals), gamma, delta, t_cut.value_or(meas.t_end()));
        out.minimizers.push_back(
            {set.points[set.minimizer].da_a, set.points[set.minimizer].da_d});
        if (r == 0) {
            for (std::size_t i = 0; i < set.points.size(); ++i)
                if (set.admissible[i]) inter.push_back(i);
        } else {
            std::vector<std::size_t> keep;
            for (std::size_t i : inter)
                if (set.admissible[i]) keep.push_back(i);
            inter = std::move(keep);
        }
        out.sets.push_back(std::move(set));
    }
    out.intersection = std::move(inter);
    out.intersection_empty = out.intersection.empty();
    return out;
}

} // namespace porescale
