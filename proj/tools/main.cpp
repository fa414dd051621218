#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "porescale/config.hpp"
#include "porescale/contour.hpp"
#include "porescale/errors.hpp"
#include "porescale/identify.hpp"
#include "porescale/io_util.hpp"
#include "porescale/manifest.hpp"
#include "porescale/mesh.hpp"
#include "porescale/stokes.hpp"
#include "porescale/transport.hpp"

namespace ps = porescale;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Ctx {
    ps::ExperimentConfig cfg;
    std::string out;
    ps::RunManifest manifest;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void finish(const std::string& phase) {
        const auto dt = std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0);
        manifest.timings_ms[phase] = dt.count();
        manifest.save(out);
    }
};

std::string mesh_path(int level) { return "mesh_" + std::to_string(level) + ".txt"; }
std::string flow_path(int level) { return "flow_" + std::to_string(level) + ".txt"; }

ps::Mesh require_mesh(Ctx& ctx, int level) {
    const std::string p = ctx.out + "/" + mesh_path(level);
    if (!fs::exists(p))
        throw ps::MissingArtifactError("missing " + mesh_path(level) +
                                       "; run the `mesh` command first");
    return ps::read_mesh_file(p);
}

ps::FlowField require_flow(Ctx& ctx, const ps::Mesh& mesh, int level) {
    const std::string p = ctx.out + "/" + flow_path(level);
    if (!fs::exists(p))
        throw ps::MissingArtifactError("missing " + flow_path(level) +
                                       "; run the `flow` command first");
    return ps::read_flow_field(mesh, p);
}

void write_csv_header(std::ofstream& f, const std::string& header) { f << header << "\n"; }

void cmd_mesh(Ctx& ctx) {
    const ps::PlanarDomain dom = ps::build_geometry(ctx.cfg.geometry);
    const auto ladder =
        ps::refinement_ladder(dom, ctx.cfg.mesh.h_target, ctx.cfg.mesh.refinements);

    std::ofstream report(ctx.out + "/mesh_report.txt");
    report << "level vertices triangles min_angle_deg max_edge area\n";
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const auto& m = ladder[i];
        ps::write_mesh(m, ctx.out + "/" + mesh_path(static_cast<int>(i)));
        ctx.manifest.record(ctx.out, mesh_path(static_cast<int>(i)));
        ctx.manifest.notes["mesh_checksum_" + std::to_string(i)] =
            ps::to_hex(ps::mesh_checksum(m));
        report << i << " " << m.n_vertices() << " " << m.n_triangles() << " "
               << ps::format_double(m.min_angle_deg()) << " "
               << ps::format_double(m.max_edge_length()) << " "
               << ps::format_double(m.total_area()) << "\n";
    }
    report.close();
    ctx.manifest.record(ctx.out, "mesh_report.txt");
    ctx.finish("mesh");
}

void cmd_flow(Ctx& ctx) {
    const int level = ctx.cfg.flow.mesh_level;
    const ps::Mesh mesh = require_mesh(ctx, level);

    std::ostringstream bcs_note;
    bcs_note << ps::format_double(ctx.cfg.flow.bcs.inlet_normal_speed) << ","
             << ps::format_double(ctx.cfg.flow.bcs.outlet_pressure);

    ps::FlowField field = [&] {
        const std::string p = ctx.out + "/" + flow_path(level);
        const std::string note_key = "flow_bcs_" + std::to_string(level);
        if (fs::exists(p) && ctx.manifest.notes.count(note_key) &&
            ctx.manifest.notes.at(note_key) == bcs_note.str()) {
            try {
                ps::FlowField cached = ps::read_flow_field(mesh, p);
                ctx.manifest.notes["flow_cache_" + std::to_string(level)] = "hit";
                return cached;
            } catch (const ps::Error&) {
                // stale artifact: recompute
            }
        }
        ctx.manifest.notes["flow_cache_" + std::to_string(level)] = "miss";
        return ps::solve_stokes(mesh, ctx.cfg.flow.bcs);
    }();

    ps::write_flow_field(field, ctx.out + "/" + flow_path(level));
    ctx.manifest.record(ctx.out, flow_path(level));
    ctx.manifest.notes["flow_bcs_" + std::to_string(level)] = bcs_note.str();

    const auto samples = ps::sample_along_line(mesh, field, ctx.cfg.geometry.height / 2.0, 2001);
    std::ofstream csv(ctx.out + "/midline.csv");
    write_csv_header(csv, "x1,u1,u2,p");
    for (std::size_t i = 0; i < samples.x.size(); ++i) {
        csv << ps::format_double(samples.x[i]) << ",";
        if (samples.present[i])
            csv << ps::format_double(samples.u1[i]) << "," << ps::format_double(samples.u2[i])
                << "," << ps::format_double(samples.p[i]);
        else
            csv << ",,";
        csv << "\n";
    }
    csv.close();
    ctx.manifest.record(ctx.out, "midline.csv");
    ctx.finish("flow");
}

void write_curve_csv(Ctx& ctx, const ps::BreakthroughCurve& curve, const std::string& name) {
    std::ofstream csv(ctx.out + "/" + name);
    write_csv_header(csv, "t,c_out");
    for (std::size_t k = 0; k < curve.times.size(); ++k)
        csv << ps::format_double(curve.times[k]) << "," << ps::format_double(curve.values[k])
            << "\n";
    csv.close();
    ctx.manifest.record(ctx.out, name);
}

void cmd_transport(Ctx& ctx) {
    const int level = ctx.cfg.flow.mesh_level;
    const ps::Mesh mesh = require_mesh(ctx, level);
    const ps::FlowField flow = require_flow(ctx, mesh, level);

    ps::RunOptions opts;
    opts.snapshot_times = ctx.cfg.transport.snapshot_times;
    const ps::TransportResult result = ps::run_transport(mesh, flow, ctx.cfg.transport.params, opts);
    write_curve_csv(ctx, result.curve, "breakthrough.csv");
    for (const auto& [t, c] : result.snapshots) {
        std::ostringstream name;
        name << "snapshot_t" << ps::format_double(t) << ".txt";
        ps::write_scalar_field(c, t, ps::mesh_checksum(mesh), ctx.out + "/" + name.str());
        ctx.manifest.record(ctx.out, name.str());
    }

    if (ctx.cfg.transport.sensitivity) {
        const auto& sens = *ctx.cfg.transport.sensitivity;
        const auto curves =
            ps::sensitivity_sweep(mesh, flow, ctx.cfg.transport.params, sens.axis, sens.values);
        const char* axis_name = sens.axis == ps::SweepAxis::Pe     ? "pe"
                                : sens.axis == ps::SweepAxis::DaA  ? "da_a"
                                : sens.axis == ps::SweepAxis::DaD  ? "da_d"
                                                                   : "m";
        for (std::size_t i = 0; i < curves.size(); ++i) {
            std::ostringstream name;
            name << "breakthrough_" << axis_name << "_" << ps::format_double(sens.values[i])
                 << ".csv";
            write_curve_csv(ctx, curves[i], name.str());
        }
    }
    ctx.finish("transport");
}

ps::Measurement import_measurement(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ps::MissingArtifactError("measurement csv not found: " + path);
    ps::Measurement meas;
    std::string line;
    if (!std::getline(f, line) || line != "t,c_tilde")
        throw ps::FormatError("measurement csv: expected header t,c_tilde");
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ps::FormatError("measurement csv: malformed row");
        meas.times.push_back(std::stod(line.substr(0, comma)));
        meas.values.push_back(std::stod(line.substr(comma + 1)));
    }
    meas.validate();
    return meas;
}

void cmd_synthesize(Ctx& ctx) {
    const int level = ctx.cfg.flow.mesh_level;
    const ps::Mesh mesh = require_mesh(ctx, level);
    const ps::FlowField flow = require_flow(ctx, mesh, level);
    ps::SolverContext sctx(mesh, flow, ctx.cfg.transport.params, ctx.cfg.workers);
    const auto& ic = ctx.cfg.identification;
    for (std::uint64_t seed : ic.seeds) {
        const ps::Measurement meas =
            ps::synthesize_measurement(sctx, ic.generator, ic.delta, seed);
        std::ostringstream name;
        name << "measurement_seed" << seed << ".csv";
        std::ofstream csv(ctx.out + "/" + name.str());
        write_csv_header(csv, "t,c_tilde");
        for (std::size_t k = 0; k < meas.times.size(); ++k)
            csv << ps::format_double(meas.times[k]) << "," << ps::format_double(meas.values[k])
                << "\n";
        csv.close();
        ctx.manifest.record(ctx.out, name.str());
    }
    ctx.finish("synthesize");
}

json box_json(const ps::FeasibleBox& b) {
    return json{{"da_a", {b.da_a_lo, b.da_a_hi}}, {"da_d", {b.da_d_lo, b.da_d_hi}}};
}

void write_set_csvs(Ctx& ctx, const ps::AdmissibleSet& set, const std::string& prefix) {
    std::ofstream surf(ctx.out + "/" + prefix + "surface.csv");
    write_csv_header(surf, "da_a,da_d,J,sqrtJ");
    for (const auto& p : set.points)
        surf << ps::format_double(p.da_a) << "," << ps::format_double(p.da_d) << ","
             << ps::format_double(p.j) << "," << ps::format_double(std::sqrt(p.j)) << "\n";
    surf.close();
    ctx.manifest.record(ctx.out, prefix + "surface.csv");

    std::ofstream adm(ctx.out + "/" + prefix + "admissible.csv");
    write_csv_header(adm, "da_a,da_d,J,sqrtJ,admissible");
    for (std::size_t i = 0; i < set.points.size(); ++i) {
        const auto& p = set.points[i];
        adm << ps::format_double(p.da_a) << "," << ps::format_double(p.da_d) << ","
            << ps::format_double(p.j) << "," << ps::format_double(std::sqrt(p.j)) << ","
            << (set.admissible[i] ? 1 : 0) << "\n";
    }
    adm.close();
    ctx.manifest.record(ctx.out, prefix + "admissible.csv");
}

void write_isolines(Ctx& ctx, const ps::ResidualSurface& surf, double threshold,
                    double step) {
    std::vector<double> xs(surf.n1), ys(surf.n2), sq(surf.points.size());
    for (int i = 0; i < surf.n1; ++i)
        xs[i] = surf.points[static_cast<std::size_t>(i) * surf.n2].da_a;
    for (int j = 0; j < surf.n2; ++j)
        ys[j] = surf.points[j].da_d;
    double vmax = 0.0;
    for (std::size_t k = 0; k < surf.points.size(); ++k) {
        sq[k] = std::sqrt(surf.points[k].j);
        vmax = std::max(vmax, sq[k]);
    }
    std::vector<double> levels;
    for (double lv = std::sqrt(threshold); lv < vmax; lv += step)
        levels.push_back(lv);
    const auto lines = ps::extract_isolines(xs, ys, sq, levels);
    std::ofstream csv(ctx.out + "/isolines.csv");
    write_csv_header(csv, "level,polyline,da_a,da_d");
    for (std::size_t l = 0; l < lines.size(); ++l)
        for (const auto& p : lines[l].points)
            csv << ps::format_double(lines[l].level) << "," << l << ","
                << ps::format_double(p.x) << "," << ps::format_double(p.y) << "\n";
    csv.close();
    ctx.manifest.record(ctx.out, "isolines.csv");
}

void write_realizations(Ctx& ctx, ps::CurveBank& bank, const std::vector<ps::ParamPoint>& pts) {
    const auto& ic = ctx.cfg.identification;
    const auto mr = ps::multi_realization(bank, ic.generator, ic.delta, ic.seeds, pts,
                                          ic.gamma, ic.t_cut);
    json rj;
    rj["intersection_size"] = mr.intersection.size();
    rj["intersection_empty"] = mr.intersection_empty;
    rj["realizations"] = json::array();
    for (std::size_t r = 0; r < mr.sets.size(); ++r)
        rj["realizations"].push_back(
            {{"seed", ic.seeds[r]},
             {"n_admissible", mr.sets[r].n_admissible()},
             {"J_min", mr.sets[r].points[mr.sets[r].minimizer].j},
             {"minimizer",
              {{"da_a", mr.minimizers[r].da_a}, {"da_d", mr.minimizers[r].da_d}}}});
    std::ofstream f(ctx.out + "/realizations.json");
    f << rj.dump(2) << "\n";
    f.close();
    ctx.manifest.record(ctx.out, "realizations.json");
}

void cmd_identify(Ctx& ctx) {
    const int level = ctx.cfg.flow.mesh_level;
    const ps::Mesh mesh = require_mesh(ctx, level);
    const ps::FlowField flow = require_flow(ctx, mesh, level);
    const auto& ic = ctx.cfg.identification;

    ps::SolverContext sctx(mesh, flow, ctx.cfg.transport.params, ctx.cfg.workers);
    ps::CurveBank bank(sctx);
    const double t_end = ctx.cfg.transport.params.t_end;

    std::vector<ps::Measurement> measurements;
    if (ic.measurement_csv) {
        measurements.push_back(import_measurement(*ic.measurement_csv));
        // External data: the configured delta quantifies the known noise level.
        measurements.back().delta = ic.delta;
    } else {
        for (std::uint64_t seed : ic.seeds)
            measurements.push_back(
                ps::synthesize_measurement(sctx, ic.generator, ic.delta, seed));
    }

    json minimizer_json;
    minimizer_json["minimizers"] = json::array();

    if (ic.stages) {
        json stages_json = json::array();
        for (std::size_t r = 0; r < measurements.size(); ++r) {
            const auto results = ps::multistage_identify(bank, *ic.stages, measurements[r],
                                                         ic.gamma);
            json per_seed = json::array();
            for (const auto& sr : results) {
                const auto& best = sr.set.points[sr.set.minimizer];
                per_seed.push_back({{"box", box_json(sr.box)},
                                    {"n_points", sr.set.points.size()},
                                    {"n_admissible", sr.set.n_admissible()},
                                    {"threshold", sr.set.threshold},
                                    {"admissible_bbox", box_json(sr.set.admissible_bounding_box())},
                                    {"minimizer", {{"da_a", best.da_a},
                                                   {"da_d", best.da_d},
                                                   {"J", best.j}}}});
            }
            stages_json.push_back({{"seed", measurements[r].seed ? json(*measurements[r].seed)
                                                                 : json(nullptr)},
                                   {"stages", per_seed}});
            const auto& last = results.back().set;
            const auto& best = last.points[last.minimizer];
            minimizer_json["minimizers"].push_back(
                {{"da_a", best.da_a}, {"da_d", best.da_d}, {"J", best.j}});
            if (r == 0) write_set_csvs(ctx, last, "");
        }
        std::ofstream f(ctx.out + "/stages.json");
        f << stages_json.dump(2) << "\n";
        f.close();
        ctx.manifest.record(ctx.out, "stages.json");
    } else if (ic.strategy == ps::SampleStrategy::Grid) {
        // Shared lattice across realizations.
        const auto pts = ps::make_grid_points(ic.box, ic.n1, ic.n2);
        ps::ResidualSurface first_surface;
        std::vector<ps::AdmissibleSet> sets;
        for (std::size_t r = 0; r < measurements.size(); ++r) {
            ps::ResidualSurface surf =
                ps::grid_sweep(bank, ic.box, ic.n1, ic.n2, measurements[r], ic.t_cut);
            ps::AdmissibleSet set = ps::classify(surf.points, ic.gamma, measurements[r].delta,
                                                 ic.t_cut.value_or(t_end));
            const auto& best = set.points[set.minimizer];
            minimizer_json["minimizers"].push_back(
                {{"da_a", best.da_a}, {"da_d", best.da_d}, {"J", best.j}});
            if (r == 0) {
                first_surface = std::move(surf);
                write_set_csvs(ctx, set, "");
                write_isolines(ctx, first_surface, set.threshold, ic.isoline_step);
            }
            sets.push_back(std::move(set));
        }
        if (measurements.size() > 1 && !ic.measurement_csv)
            write_realizations(ctx, bank, pts);
    } else {
        const auto pts = ps::sobol_sample(ic.box, ic.n);
        for (std::size_t r = 0; r < measurements.size(); ++r) {
            ps::AdmissibleSet set =
                ps::random_search(bank, ic.box, ic.n, measurements[r], ic.gamma, ic.t_cut);
            const auto& best = set.points[set.minimizer];
            minimizer_json["minimizers"].push_back(
                {{"da_a", best.da_a}, {"da_d", best.da_d}, {"J", best.j}});
            if (r == 0) write_set_csvs(ctx, set, "");
        }
        if (measurements.size() > 1 && !ic.measurement_csv)
            write_realizations(ctx, bank, pts);
    }

    if (!minimizer_json["minimizers"].empty()) {
        minimizer_json["da_a"] = minimizer_json["minimizers"][0]["da_a"];
        minimizer_json["da_d"] = minimizer_json["minimizers"][0]["da_d"];
        minimizer_json["J"] = minimizer_json["minimizers"][0]["J"];
    }
    std::ofstream f(ctx.out + "/minimizer.json");
    f << minimizer_json.dump(2) << "\n";
    f.close();
    ctx.manifest.record(ctx.out, "minimizer.json");
    ctx.finish("identify");
}

int run(int argc, char** argv) {
    CLI::App app{"pore-scale reactive transport and rate identification"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, output_dir;
    int workers = 0;
    std::int64_t seed = -1;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--output", output_dir, "output directory");
    app.add_option("--workers", workers, "max concurrent evaluations");
    app.add_option("--seed", seed, "override identification seed");

    auto* c_mesh = app.add_subcommand("mesh", "build the mesh ladder");
    auto* c_flow = app.add_subcommand("flow", "solve the Stokes flow");
    auto* c_transport = app.add_subcommand("transport", "run the transport problem");
    auto* c_synthesize = app.add_subcommand("synthesize", "emit synthetic measurements");
    auto* c_identify = app.add_subcommand("identify", "run parameter identification");

    CLI11_PARSE(app, argc, argv);

    Ctx ctx;
    ctx.cfg = config_path.empty() ? ps::parse_config("{}") : ps::load_config(config_path);
    if (!output_dir.empty()) ctx.cfg.output_dir = output_dir;
    if (const char* env = std::getenv("PORESCALE_OUTPUT_DIR"); env && *env)
        ctx.cfg.output_dir = env;
    if (workers > 0) ctx.cfg.workers = workers;
    if (seed >= 0) ctx.cfg.identification.seeds = {static_cast<std::uint64_t>(seed)};
    ctx.out = ctx.cfg.output_dir;

    fs::create_directories(ctx.out);
    ctx.manifest = ps::RunManifest::load(ctx.out);
    ctx.manifest.config_checksum =
        config_path.empty() ? "default" : ps::file_checksum(config_path);

    if (c_mesh->parsed()) cmd_mesh(ctx);
    if (c_flow->parsed()) cmd_flow(ctx);
    if (c_transport->parsed()) cmd_transport(ctx);
    if (c_synthesize->parsed()) cmd_synthesize(ctx);
    if (c_identify->parsed()) cmd_identify(ctx);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ps::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ps::MeshQualityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ps::OverlapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ps::OutOfDomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ps::LinearSolveError& e) {
        std::cerr << "error: " << e.what() << " (residual " << e.achieved_residual << ")\n";
        return 4;
    } catch (const ps::SingularSystemError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ps::NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << " after " << e.iterations << " iterations\n";
        return 4;
    } catch (const ps::EmptyAdmissibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const ps::GridMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const ps::MissingArtifactError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
