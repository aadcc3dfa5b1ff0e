#include "run_config.hpp"

#include <blochtomo/errors.hpp>
#include <blochtomo/serialization.hpp>

#include <cmath>
#include <initializer_list>
#include <string_view>

namespace blochtomo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ConfigError, where + ": " + what);
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    require_object(j, where);
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) fail(where, "unknown key \"" + key + "\"");
    }
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "must be finite");
    return v;
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail(where, "expected true or false");
    return j.get<bool>();
}

std::vector<double> number_list(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

AxisRange axis(const json& j, const std::string& where) {
    const auto v = number_list(j, where);
    if (v.size() != 2) fail(where, "expected [lo, hi]");
    return {v[0], v[1]};
}

fs::path input_path(const json& j, const fs::path& base, const std::string& where) {
    if (!j.is_string() || j.get<std::string>().empty()) fail(where, "expected a path");
    const fs::path p = j.get<std::string>();
    return p.is_absolute() ? p : base / p;
}

Plate plate(const json& j, const std::string& where) {
    check_keys(j, {"delta", "eta"}, where);
    if (!j.contains("delta") || !j.contains("eta")) fail(where, "needs delta and eta");
    Plate p{number(j["delta"], where + ".delta"), number(j["eta"], where + ".eta")};
    if (p.eta < 0.0) fail(where + ".eta", "must be >= 0");
    return p;
}

ModelSection model(const json& j) {
    check_keys(j, {"delta", "eta", "plates"}, "model");
    ModelSection m;
    if (j.contains("plates")) {
        if (j.contains("delta") || j.contains("eta")) fail("model", "give either delta/eta or plates, not both");
        const auto& arr = j["plates"];
        if (!arr.is_array() || arr.empty()) fail("model.plates", "expected a non-empty array");
        for (std::size_t i = 0; i < arr.size(); ++i) m.plates.push_back(plate(arr[i], "model.plates[" + std::to_string(i) + "]"));
    } else {
        m.plates.push_back(plate(j, "model"));
    }
    return m;
}

NoiseConfig noise(const json& j) {
    check_keys(j, {"gaussian_sigma", "photon_budget"}, "noise");
    NoiseConfig n;
    if (j.contains("gaussian_sigma")) n.gaussian_sigma = number(j["gaussian_sigma"], "noise.gaussian_sigma");
    if (j.contains("photon_budget") && !j["photon_budget"].is_null()) {
        n.photon_budget = number(j["photon_budget"], "noise.photon_budget");
    }
    return n;
}

void solver(const json& j, SolverConfig& s) {
    check_keys(j, {"max_iterations", "cost_tolerance", "step_tolerance", "restarts", "parallel", "segments"}, "solver");
    if (j.contains("max_iterations")) s.max_iterations = integer(j["max_iterations"], "solver.max_iterations");
    if (j.contains("cost_tolerance")) s.cost_tolerance = number(j["cost_tolerance"], "solver.cost_tolerance");
    if (j.contains("step_tolerance")) s.step_tolerance = number(j["step_tolerance"], "solver.step_tolerance");
    if (j.contains("restarts")) s.restarts = integer(j["restarts"], "solver.restarts");
    if (j.contains("parallel")) s.parallel = boolean(j["parallel"], "solver.parallel");
    if (j.contains("segments")) s.segments = integer(j["segments"], "solver.segments");
}

ImageGeometry geometry(const json& j) {
    check_keys(j, {"width", "height", "bz_width_px", "waist_px", "i0", "grid"}, "simulate.geometry");
    ImageGeometry g;
    if (j.contains("width")) g.width = integer(j["width"], "simulate.geometry.width");
    if (j.contains("height")) g.height = integer(j["height"], "simulate.geometry.height");
    if (j.contains("bz_width_px")) g.bz_width_px = integer(j["bz_width_px"], "simulate.geometry.bz_width_px");
    g.waist_px = g.bz_width_px;
    if (j.contains("waist_px")) g.waist_px = number(j["waist_px"], "simulate.geometry.waist_px");
    if (j.contains("i0")) g.i0 = number(j["i0"], "simulate.geometry.i0");
    if (j.contains("grid")) g.grid = integer(j["grid"], "simulate.geometry.grid");
    return g;
}

CalibrationReading reading(const json& j, const std::string& where) {
    check_keys(j, {"i_ll", "i_lr", "i_ord", "i_ext"}, where);
    CalibrationReading r;
    if (j.contains("i_ll")) r.i_ll = number(j["i_ll"], where + ".i_ll");
    if (j.contains("i_lr")) r.i_lr = number(j["i_lr"], where + ".i_lr");
    if (j.contains("i_ord")) r.i_ord = number(j["i_ord"], where + ".i_ord");
    if (j.contains("i_ext")) r.i_ext = number(j["i_ext"], where + ".i_ext");
    return r;
}

}  // namespace

double ModelSection::delta() const {
    double s = 0.0;
    for (const auto& p : plates) s += p.delta;
    return s;
}

double ModelSection::eta() const {
    double s = 0.0;
    for (const auto& p : plates) s += p.eta;
    return s;
}

const ModelSection& RunConfig::require_model() const {
    if (!model) fail("model", "this command needs a model section");
    return *model;
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
    check_keys(j,
               {"model", "grid", "noise", "solver", "seed", "outputs", "simulate", "reconstruct", "analyze",
                "phase_diagram", "calibrate", "pipeline"},
               "config");
    RunConfig cfg;
    if (j.contains("model")) cfg.model = model(j["model"]);
    if (j.contains("grid")) {
        check_keys(j["grid"], {"n_q"}, "grid");
        if (j["grid"].contains("n_q")) cfg.n_q = integer(j["grid"]["n_q"], "grid.n_q");
    }
    if (cfg.n_q < 8) fail("grid.n_q", "must be >= 8");
    if (j.contains("noise")) cfg.noise = noise(j["noise"]);
    cfg.noise.validate();
    cfg.solver = cfg.noise.noiseless() ? SolverConfig::noiseless() : SolverConfig::noisy();
    if (j.contains("solver")) solver(j["solver"], cfg.solver);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("outputs")) {
        check_keys(j["outputs"], {"directory"}, "outputs");
        if (j["outputs"].contains("directory")) {
            cfg.output_dir = input_path(j["outputs"]["directory"], base_dir, "outputs.directory");
        }
    }
    if (j.contains("simulate")) {
        const auto& s = j["simulate"];
        check_keys(s, {"dataset", "images", "geometry"}, "simulate");
        SimulateSection sec;
        if (s.contains("dataset")) sec.dataset = boolean(s["dataset"], "simulate.dataset");
        if (s.contains("images")) sec.images = boolean(s["images"], "simulate.images");
        if (s.contains("geometry")) sec.geometry = geometry(s["geometry"]);
        if (!s.contains("geometry") || !s["geometry"].contains("grid")) sec.geometry.grid = cfg.n_q;
        sec.geometry.validate();
        cfg.simulate = sec;
    }
    if (j.contains("reconstruct")) {
        const auto& r = j["reconstruct"];
        check_keys(r, {"input"}, "reconstruct");
        if (!r.contains("input")) fail("reconstruct", "needs input");
        cfg.reconstruct = ReconstructSection{input_path(r["input"], base_dir, "reconstruct.input")};
    }
    if (j.contains("analyze")) {
        const auto& a = j["analyze"];
        check_keys(a, {"input", "eta"}, "analyze");
        if (!a.contains("input")) fail("analyze", "needs input");
        AnalyzeSection sec{input_path(a["input"], base_dir, "analyze.input"), std::nullopt};
        if (a.contains("eta")) sec.eta = number(a["eta"], "analyze.eta");
        cfg.analyze = sec;
    }
    if (j.contains("phase_diagram")) {
        const auto& p = j["phase_diagram"];
        check_keys(p, {"delta", "eta", "resolution", "n_q", "ep_deltas"}, "phase_diagram");
        PhaseDiagramSection sec;
        if (p.contains("delta")) sec.delta = axis(p["delta"], "phase_diagram.delta");
        if (p.contains("eta")) sec.eta = axis(p["eta"], "phase_diagram.eta");
        if (p.contains("resolution")) sec.resolution = integer(p["resolution"], "phase_diagram.resolution");
        if (p.contains("n_q")) sec.n_q = integer(p["n_q"], "phase_diagram.n_q");
        if (p.contains("ep_deltas")) sec.ep_deltas = number_list(p["ep_deltas"], "phase_diagram.ep_deltas");
        if (sec.resolution < 8) fail("phase_diagram.resolution", "must be >= 8");
        if (sec.n_q < 8) fail("phase_diagram.n_q", "must be >= 8");
        cfg.phase_diagram = sec;
    }
    if (j.contains("calibrate")) {
        const auto& c = j["calibrate"];
        check_keys(c, {"plates", "dichroic"}, "calibrate");
        CalibrateSection sec;
        if (!c.contains("plates") || !c["plates"].is_array() || c["plates"].empty()) {
            fail("calibrate.plates", "expected a non-empty array of readings");
        }
        for (std::size_t i = 0; i < c["plates"].size(); ++i) {
            sec.plates.push_back(reading(c["plates"][i], "calibrate.plates[" + std::to_string(i) + "]"));
        }
        if (c.contains("dichroic")) sec.dichroic = boolean(c["dichroic"], "calibrate.dichroic");
        cfg.calibrate = sec;
    }
    if (j.contains("pipeline")) {
        const auto& p = j["pipeline"];
        check_keys(p, {"eta_sweep"}, "pipeline");
        PipelineSection sec;
        if (p.contains("eta_sweep")) sec.eta_sweep = number_list(p["eta_sweep"], "pipeline.eta_sweep");
        for (double e : sec.eta_sweep) {
            if (e < 0.0) fail("pipeline.eta_sweep", "eta must be >= 0");
        }
        cfg.pipeline = sec;
    }
    try {
        cfg.solver.validate();
    } catch (const Error& e) {
        fail("solver", e.what());
    }
    cfg.source = j;
    cfg.source.erase("outputs");
    return cfg;
}

RunConfig load_run_config(const fs::path& file) {
    const json j = read_json(file);
    return parse_run_config(j, file.has_parent_path() ? file.parent_path() : fs::path("."));
}

}  // namespace blochtomo::cli
