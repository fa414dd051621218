#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "porescale/geometry.hpp"
#include "porescale/identify.hpp"
#include "porescale/stokes.hpp"
#include "porescale/transport.hpp"

namespace porescale {

struct MeshConfig {
    double h_target = 0.062;
    int refinements = 2;
};

struct FlowConfig {
    FlowBCs bcs;
    int mesh_level = 1; // ladder level used by flow/transport/identify
};

struct SensitivityConfig {
    SweepAxis axis = SweepAxis::Pe;
    std::vector<double> values;
};

struct TransportConfig {
    TransportParams params;
    std::vector<double> snapshot_times;
    std::optional<SensitivityConfig> sensitivity;
};

struct IdentificationConfig {
    FeasibleBox box;
    SampleStrategy strategy = SampleStrategy::Grid;
    int n = 150;            // Sobol points
    int n1 = 51, n2 = 51;   // grid dimensions
    double gamma = 1.02625;
    double delta = 0.01;
    std::vector<std::uint64_t> seeds = {1};
    ParamPoint generator{0.005, 0.05};
    std::optional<double> t_cut;
    std::optional<std::string> measurement_csv;
    std::optional<StagePlan> stages;
    double isoline_step = 0.02;
};

/// Whole-experiment configuration; unknown JSON keys are rejected.
struct ExperimentConfig {
    GeometryConfig geometry;
    MeshConfig mesh;
    FlowConfig flow;
    TransportConfig transport;
    IdentificationConfig identification;
    std::string output_dir = "out";
    int workers = 1;

    void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

} // namespace porescale
