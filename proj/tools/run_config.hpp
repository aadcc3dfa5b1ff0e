// run_config.hpp — JSON run configuration for the blochtomo tool
//
// Every object is checked against its allowed keys; anything unknown is a
// ConfigError.  Angles are radians, eta is dimensionless.  Input paths are
// resolved relative to the directory of the config file.

#pragma once

#include <blochtomo/calibration.hpp>
#include <blochtomo/polarimetry.hpp>
#include <blochtomo/tomography.hpp>
#include <blochtomo/topology.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace blochtomo::cli {

struct Plate {
    double delta = 0.0;
    double eta = 0.0;
};

struct ModelSection {
    std::vector<Plate> plates;  // one entry for a single (delta, eta)

    // Cascaded plates add their birefringence and dichroism.
    double delta() const;
    double eta() const;
};

struct SimulateSection {
    bool dataset = true;
    bool images = false;
    ImageGeometry geometry;
};

struct ReconstructSection {
    std::filesystem::path input;  // dataset JSON or image-set directory
};

struct AnalyzeSection {
    std::filesystem::path input;  // reconstruction JSON
    std::optional<double> eta;    // label carried into the PT table
};

struct PhaseDiagramSection {
    AxisRange delta{0.0, 6.283185307179586};
    AxisRange eta{0.0, 2.0};
    int resolution = 64;
    int n_q = 90;
    std::vector<double> ep_deltas;
};

struct CalibrateSection {
    std::vector<CalibrationReading> plates;
    bool dichroic = true;
};

struct PipelineSection {
    std::vector<double> eta_sweep;  // empty: the model's own eta only
};

struct RunConfig {
    std::optional<ModelSection> model;
    int n_q = 90;
    NoiseConfig noise;
    SolverConfig solver;
    std::uint64_t seed = 1;
    std::optional<std::filesystem::path> output_dir;

    std::optional<SimulateSection> simulate;
    std::optional<ReconstructSection> reconstruct;
    std::optional<AnalyzeSection> analyze;
    std::optional<PhaseDiagramSection> phase_diagram;
    std::optional<CalibrateSection> calibrate;
    std::optional<PipelineSection> pipeline;

    nlohmann::json source;  // normalized input, hashed into provenance

    const ModelSection& require_model() const;
};

/// Parses and validates.  Throws Error(ConfigError) on unknown keys, wrong
/// types or out-of-range values.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

RunConfig load_run_config(const std::filesystem::path& file);

}  // namespace blochtomo::cli
