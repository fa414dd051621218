#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "porescale/mesh.hpp"
#include "porescale/stokes.hpp"
#include "porescale/transport.hpp"

namespace porescale {

struct ParamPoint {
    double da_a = 0.0;
    double da_d = 0.0;
};

/// Breakthrough data on a tau-uniform grid starting at tau. delta is the
/// noise amplitude used to synthesize it (0 for exact); seed is absent for
/// imported data.
struct Measurement {
    std::vector<double> times;
    std::vector<double> values;
    double delta = 0.0;
    std::optional<std::uint64_t> seed;

    void validate() const;
    double tau() const;
    double t_end() const { return times.empty() ? 0.0 : times.back(); }
};

/// Starting feasible box G for the two identified rates.
struct FeasibleBox {
    double da_a_lo = 0.0, da_a_hi = 0.01;
    double da_d_lo = 0.0, da_d_hi = 0.1;

    void validate() const;
    bool contains(ParamPoint p) const;
    double area() const { return (da_a_hi - da_a_lo) * (da_d_hi - da_d_lo); }
};

struct EvaluatedPoint {
    double da_a = 0.0;
    double da_d = 0.0;
    double j = 0.0;
};

struct AdmissibleSet {
    std::vector<EvaluatedPoint> points;
    std::vector<char> admissible; // J <= threshold, aligned with points
    double threshold = 0.0;
    double gamma = 1.0;
    std::size_t minimizer = 0; // index of the smallest J (first on ties)

    std::size_t n_admissible() const;
    /// Axis-aligned bounding box of the admissible points; throws
    /// EmptyAdmissibleError when there are none.
    FeasibleBox admissible_bounding_box() const;
};

enum class SampleStrategy { Grid, Sobol };

struct Stage {
    std::optional<FeasibleBox> box; // absent: AUTO from the previous stage
    SampleStrategy strategy = SampleStrategy::Sobol;
    int n = 150;            // Sobol sample count
    int n1 = 51, n2 = 51;   // grid dimensions
    std::optional<double> t_cut;
};

struct StagePlan {
    FeasibleBox initial_box; // original G; AUTO boxes are clipped to it
    std::vector<Stage> stages;

    void validate() const;
};

/// Immutable solver context shared by all parameter evaluations: one mesh,
/// one flow solve, one assembled transport operator set.
struct SolverContext {
    SolverContext(const Mesh& mesh, const FlowField& flow, const TransportParams& base,
                  int workers = 1);

    const Mesh& mesh;
    const FlowField& flow;
    TransportParams base; // isotherm rates are overwritten per point
    TransportOperators ops;
    int workers = 1;
};

/// Caches breakthrough curves by exact (Da_a, Da_d) pair. Missing points are
/// computed concurrently; results are keyed by point index, so identical
/// inputs give identical banks regardless of scheduling.
class CurveBank {
public:
    explicit CurveBank(SolverContext& ctx) : ctx_(ctx) {}

    const BreakthroughCurve& at(ParamPoint p);
    std::vector<const BreakthroughCurve*> evaluate(const std::vector<ParamPoint>& pts);
    std::size_t size() const { return store_.size(); }

private:
    SolverContext& ctx_;
    std::map<std::pair<double, double>, std::size_t> index_;
    std::vector<std::unique_ptr<BreakthroughCurve>> store_;
};

/// Noise draw for measurement step n (1-based): uniform on [-1, 1], keyed by
/// (seed, n) so evaluation order cannot matter.
double noise_sigma(std::uint64_t seed, int n);

/// Runs the direct problem at the generator rates and adds delta-amplitude
/// uniform noise.
Measurement synthesize_measurement(SolverContext& ctx, ParamPoint generator, double delta,
                                   std::uint64_t seed);

/// Time-discrete residual functional: J = sum tau * (c_out - c_tilde)^2 over
/// steps with t <= t_cut (all steps when t_cut is absent).
double residual(const BreakthroughCurve& curve, const Measurement& meas,
                std::optional<double> t_cut = {});

/// Admissibility threshold gamma * delta^2 * T_eff / 3.
double admissible_threshold(double gamma, double delta, double t_effective);

std::vector<ParamPoint> make_grid_points(const FeasibleBox& box, int n1, int n2);
/// First n 2D Sobol points mapped affinely into the box.
std::vector<ParamPoint> sobol_sample(const FeasibleBox& box, int n);

struct ResidualSurface {
    FeasibleBox box;
    int n1 = 0, n2 = 0;
    std::vector<EvaluatedPoint> points; // row-major, da_d fastest
};

ResidualSurface grid_sweep(CurveBank& bank, const FeasibleBox& box, int n1, int n2,
                           const Measurement& meas, std::optional<double> t_cut = {});

AdmissibleSet classify(std::vector<EvaluatedPoint> points, double gamma, double delta,
                       double t_effective);

AdmissibleSet random_search(CurveBank& bank, const FeasibleBox& box, int n,
                            const Measurement& meas, double gamma,
                            std::optional<double> t_cut = {});

struct StageResult {
    FeasibleBox box;
    Stage stage;
    AdmissibleSet set;
};

/// Consecutively shrinking search; AUTO boxes bound the previous admissible
/// set, padded by 20% per side and clipped to the plan's initial box.
/// Throws EmptyAdmissibleError when a stage admits nothing.
std::vector<StageResult> multistage_identify(CurveBank& bank, const StagePlan& plan,
                                             const Measurement& meas, double gamma);

struct MultiRealizationResult {
    std::vector<AdmissibleSet> sets;          // one per seed
    std::vector<ParamPoint> minimizers;       // one per seed
    std::vector<std::size_t> intersection;    // indices admissible in every set
    bool intersection_empty = false;
};

/// Evaluates one shared point set against R seeded noise realizations of the
/// same generator.
MultiRealizationResult multi_realization(CurveBank& bank, ParamPoint generator, double delta,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::vector<ParamPoint>& eval_points,
                                         double gamma, std::optional<double> t_cut = {});

} // namespace porescale
