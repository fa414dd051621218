#include "porescale/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "porescale/errors.hpp"

namespace porescale {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object())
        throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError("config: unknown key \"" + key + "\" in " + where);
}

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number())
        throw ConfigError(std::string("config: ") + key + " must be a number");
    return j[key].get<double>();
}

int integer(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer())
        throw ConfigError(std::string("config: ") + key + " must be an integer");
    return j[key].get<int>();
}

FeasibleBox parse_box(const json& j, const std::string& where) {
    check_keys(j, {"da_a", "da_d"}, where);
    FeasibleBox box;
    auto range = [&](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        const auto& r = j[key];
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
            throw ConfigError("config: " + where + "." + key + " must be [lo, hi]");
        lo = r[0].get<double>();
        hi = r[1].get<double>();
    };
    range("da_a", box.da_a_lo, box.da_a_hi);
    range("da_d", box.da_d_lo, box.da_d_hi);
    box.validate();
    return box;
}

SampleStrategy parse_strategy(const json& j, const char* key, SampleStrategy fallback) {
    if (!j.contains(key)) return fallback;
    const std::string s = j[key].get<std::string>();
    if (s == "grid") return SampleStrategy::Grid;
    if (s == "sobol") return SampleStrategy::Sobol;
    throw ConfigError("config: strategy must be \"grid\" or \"sobol\"");
}

Isotherm parse_isotherm(const json& j) {
    check_keys(j, {"variant", "da_a", "da_d", "m"}, "transport.isotherm");
    Isotherm iso;
    if (j.contains("variant")) {
        const std::string v = j["variant"].get<std::string>();
        if (v == "henry")
            iso.kind = IsothermKind::Henry;
        else if (v == "langmuir")
            iso.kind = IsothermKind::Langmuir;
        else
            throw ConfigError("config: isotherm variant must be \"henry\" or \"langmuir\"");
    }
    iso.da_a = num(j, "da_a", 0.005);
    iso.da_d = num(j, "da_d", 0.05);
    iso.capacity = num(j, "m", 1.0);
    iso.validate();
    return iso;
}

SweepAxis parse_axis(const std::string& s) {
    if (s == "pe") return SweepAxis::Pe;
    if (s == "da_a") return SweepAxis::DaA;
    if (s == "da_d") return SweepAxis::DaD;
    if (s == "m") return SweepAxis::Capacity;
    throw ConfigError("config: sensitivity axis must be pe, da_a, da_d or m");
}

Stage parse_stage(const json& j, const std::string& where) {
    check_keys(j, {"box", "strategy", "n", "grid", "t_cut"}, where);
    Stage st;
    if (j.contains("box")) {
        if (j["box"].is_string()) {
            if (j["box"].get<std::string>() != "auto")
                throw ConfigError("config: " + where + ".box must be \"auto\" or a box object");
        } else {
            st.box = parse_box(j["box"], where + ".box");
        }
    }
    st.strategy = parse_strategy(j, "strategy", SampleStrategy::Sobol);
    st.n = integer(j, "n", 150);
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (!g.is_array() || g.size() != 2)
            throw ConfigError("config: " + where + ".grid must be [n1, n2]");
        st.n1 = g[0].get<int>();
        st.n2 = g[1].get<int>();
    }
    if (j.contains("t_cut")) st.t_cut = j["t_cut"].get<double>();
    return st;
}

} // namespace

void ExperimentConfig::validate() const {
    geometry.validate();
    if (!(mesh.h_target > 0.0))
        throw ConfigError("config: mesh.h_target must be positive");
    if (mesh.refinements < 0)
        throw ConfigError("config: mesh.refinements must be non-negative");
    if (flow.mesh_level < 0 || flow.mesh_level > mesh.refinements)
        throw ConfigError("config: flow.mesh_level out of the ladder range");
    flow.bcs.validate();
    transport.params.validate();
    identification.box.validate();
    if (!(identification.gamma > 1.0))
        throw ConfigError("config: identification.gamma must exceed 1");
    if (identification.delta < 0.0)
        throw ConfigError("config: identification.delta must be non-negative");
    if (identification.seeds.empty())
        throw ConfigError("config: identification.seeds must not be empty");
    if (identification.t_cut &&
        *identification.t_cut > transport.params.t_end + 1e-12)
        throw ConfigError("config: identification.t_cut exceeds T_end");
    if (identification.stages) identification.stages->validate();
    if (workers < 1)
        throw ConfigError("config: workers must be >= 1");
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, {"geometry", "mesh", "flow", "transport", "identification", "output_dir",
                   "workers"},
               "top level");

    ExperimentConfig cfg;
    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        check_keys(g,
                   {"length", "height", "obstacle_radius", "obstacle_pitch", "obstacle_count",
                    "first_center_x1", "boundary_arc_segments"},
                   "geometry");
        cfg.geometry.length = num(g, "length", cfg.geometry.length);
        cfg.geometry.height = num(g, "height", cfg.geometry.height);
        cfg.geometry.obstacle_radius = num(g, "obstacle_radius", cfg.geometry.obstacle_radius);
        cfg.geometry.obstacle_pitch = num(g, "obstacle_pitch", cfg.geometry.obstacle_pitch);
        cfg.geometry.obstacle_count = integer(g, "obstacle_count", cfg.geometry.obstacle_count);
        cfg.geometry.first_center_x1 = num(g, "first_center_x1", cfg.geometry.first_center_x1);
        cfg.geometry.boundary_arc_segments =
            integer(g, "boundary_arc_segments", cfg.geometry.boundary_arc_segments);
    }
    if (j.contains("mesh")) {
        const auto& m = j["mesh"];
        check_keys(m, {"h_target", "refinements"}, "mesh");
        cfg.mesh.h_target = num(m, "h_target", cfg.mesh.h_target);
        cfg.mesh.refinements = integer(m, "refinements", cfg.mesh.refinements);
    }
    if (j.contains("flow")) {
        const auto& f = j["flow"];
        check_keys(f, {"inlet_normal_speed", "outlet_pressure", "mesh_level"}, "flow");
        cfg.flow.bcs.inlet_normal_speed = num(f, "inlet_normal_speed", 1.0);
        cfg.flow.bcs.outlet_pressure = num(f, "outlet_pressure", 0.0);
        cfg.flow.mesh_level = integer(f, "mesh_level", 1);
    }
    if (j.contains("transport")) {
        const auto& t = j["transport"];
        check_keys(t, {"pe", "isotherm", "tau", "t_end", "snapshot_times", "sensitivity"},
                   "transport");
        cfg.transport.params.pe = num(t, "pe", 10.0);
        if (t.contains("isotherm"))
            cfg.transport.params.isotherm = parse_isotherm(t["isotherm"]);
        else
            cfg.transport.params.isotherm = Isotherm::henry(0.005, 0.05);
        cfg.transport.params.tau = num(t, "tau", 0.1);
        cfg.transport.params.t_end = num(t, "t_end", 40.0);
        if (t.contains("snapshot_times"))
            for (const auto& v : t["snapshot_times"])
                cfg.transport.snapshot_times.push_back(v.get<double>());
        if (t.contains("sensitivity")) {
            const auto& s = t["sensitivity"];
            check_keys(s, {"axis", "values"}, "transport.sensitivity");
            SensitivityConfig sc;
            sc.axis = parse_axis(s.at("axis").get<std::string>());
            for (const auto& v : s.at("values"))
                sc.values.push_back(v.get<double>());
            cfg.transport.sensitivity = sc;
        }
    } else {
        cfg.transport.params.isotherm = Isotherm::henry(0.005, 0.05);
    }
    if (j.contains("identification")) {
        const auto& id = j["identification"];
        check_keys(id,
                   {"box", "strategy", "n", "grid", "gamma", "delta", "seeds", "generator",
                    "t_cut", "measurement_csv", "stages", "isoline_step"},
                   "identification");
        auto& ic = cfg.identification;
        if (id.contains("box")) ic.box = parse_box(id["box"], "identification.box");
        ic.strategy = parse_strategy(id, "strategy", SampleStrategy::Grid);
        ic.n = integer(id, "n", 150);
        if (id.contains("grid")) {
            const auto& g = id["grid"];
            if (!g.is_array() || g.size() != 2)
                throw ConfigError("config: identification.grid must be [n1, n2]");
            ic.n1 = g[0].get<int>();
            ic.n2 = g[1].get<int>();
        }
        ic.gamma = num(id, "gamma", ic.gamma);
        ic.delta = num(id, "delta", ic.delta);
        if (id.contains("seeds")) {
            ic.seeds.clear();
            for (const auto& s : id["seeds"])
                ic.seeds.push_back(s.get<std::uint64_t>());
        }
        if (id.contains("generator")) {
            const auto& g = id["generator"];
            check_keys(g, {"da_a", "da_d"}, "identification.generator");
            ic.generator.da_a = num(g, "da_a", ic.generator.da_a);
            ic.generator.da_d = num(g, "da_d", ic.generator.da_d);
        }
        if (id.contains("t_cut")) ic.t_cut = id["t_cut"].get<double>();
        if (id.contains("measurement_csv"))
            ic.measurement_csv = id["measurement_csv"].get<std::string>();
        if (id.contains("stages")) {
            StagePlan plan;
            plan.initial_box = ic.box;
            int k = 0;
            for (const auto& st : id["stages"])
                plan.stages.push_back(
                    parse_stage(st, "identification.stages[" + std::to_string(k++) + "]"));
            ic.stages = plan;
        }
        ic.isoline_step = num(id, "isoline_step", ic.isoline_step);
    }
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    cfg.workers = integer(j, "workers", 1);

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

} // namespace porescale
