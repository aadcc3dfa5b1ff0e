#include "commands.hpp"

#include <blochtomo/errors.hpp>
#include <blochtomo/image_io.hpp>
#include <blochtomo/pt_symmetry.hpp>
#include <blochtomo/topology.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace blochtomo::cli {

namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

void note(const Context& ctx, const std::string& line) {
    if (ctx.log) *ctx.log << line << '\n';
}

PolarimetrySet simulate_dataset(const RunConfig& cfg, double delta, double eta) {
    NoiseConfig noise = cfg.noise;
    noise.seed = cfg.seed;
    return synthesize_dataset(ModelParams(delta, eta), cfg.n_q, noise);
}

PolarimetrySet load_input(const RunConfig& cfg, const fs::path& input) {
    if (fs::is_directory(input)) {
        const auto images = read_image_set(input);
        return ingest_images(images, cfg.n_q);
    }
    return dataset_from_json(read_json(input));
}

BandReconstruction reconstruct(const RunConfig& cfg, const PolarimetrySet& data) {
    SolverConfig solver = cfg.solver;
    solver.seed = cfg.seed;
    return reconstruct_bz(data, solver);
}

ojson critical_to_json(const CriticalMomentum& cm) {
    return ojson{{"q_first", cm.q_first},       {"q_second", cm.q_second},
                 {"k_first", cm.k_first},       {"k_second", cm.k_second},
                 {"min_infidelity", cm.min_infidelity}, {"shallow", cm.shallow}};
}

std::string summary_line(const ojson& a) {
    std::string s = "eta=";
    s += a["eta"].is_null() ? "?" : format_double(a["eta"].get<double>());
    s += " nu=";
    s += a["winding"].is_null() ? "n/a" : format_double(a["winding"]["re"].get<double>());
    s += " ep_suspect=" + std::to_string(a["ep_suspect"].size());
    if (!a["pt"].is_null()) {
        s += " pt=" + a["pt"]["phase"].get<std::string>();
        s += " order=" + format_double(a["pt"]["order_parameter"].get<double>());
    }
    return s;
}

ojson ep_json(double delta) {
    try {
        const auto records = find_exceptional_points(delta);
        return ep_records_to_json(delta, records);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::NotAnEP) throw;
        return ojson::array();
    }
}

}  // namespace

ojson analyze_band(const BandReconstruction& band, std::optional<double> eta, const Provenance& prov) {
    ojson out{{"format", "blochtomo-analysis"}, {"provenance", prov.to_json()}};
    out["eta"] = eta ? ojson(*eta) : ojson(nullptr);
    out["pixels"] = band.pixels.size();
    std::size_t converged = 0;
    for (const auto& px : band.pixels) converged += px.flags.converged ? 1 : 0;
    out["converged_pixels"] = converged;

    const bool chart_ok = std::all_of(band.bloch.begin(), band.bloch.end(), [](const auto& b) { return b.has_value(); });
    if (chart_ok && band.pixels.size() >= 8) {
        std::vector<Vec3> n;
        for (const auto& b : band.bloch) n.push_back(b->n);
        const cplx nu = winding_number(band.q, n);
        out["winding"] = ojson{{"re", nu.real()}, {"im", nu.imag()}, {"integer", std::lround(nu.real())}};
        out["sublattice_residual"] = sublattice_residual(n);
    } else {
        out["winding"] = nullptr;
        out["sublattice_residual"] = nullptr;
    }

    const auto steps = band.canonicals();
    const auto profile = infidelity_profile(steps);
    const CriticalMomentum cm = critical_momentum(band.q, profile);
    out["critical_momentum"] = critical_to_json(cm);

    std::set<std::size_t> chart;
    for (std::size_t k = 0; k < band.pixels.size(); ++k) {
        if (band.pixels[k].flags.ep_suspect) chart.insert(k);
    }
    ojson suspects = ojson::array();
    std::set<std::size_t> listed;
    auto add = [&](std::size_t k, const char* source) {
        if (!listed.insert(k).second) return;
        suspects.push_back(ojson{{"k", k}, {"q", band.q[k]}, {"infidelity", profile[k]}, {"source", source}});
    };
    for (std::size_t k : chart) add(k, "chart");
    if (!cm.shallow) {
        add(cm.k_first, "infidelity_minimum");
        add(cm.k_second, "infidelity_minimum");
    }
    out["ep_suspect"] = suspects;

    const HarmonicBand fit = HarmonicBand::fit(band.q, steps);
    out["harmonic_fit_residual"] = fit.fit_residual();
    const auto pure = fit.pure_spectrum_momenta();
    const double q_pt = pure ? pure->first : cm.q_first;
    try {
        const RotatedForm rf = rotate_hamiltonian(effective_hamiltonian(fit.at(q_pt)));
        PTScanEntry entry{eta.value_or(std::numeric_limits<double>::quiet_NaN()), q_pt, classify_phase(rf)};
        ojson pt = pt_entry_to_json(entry);
        pt["momentum_source"] = pure ? "pure_spectrum" : "infidelity_minimum";
        pt["sublattice_violation"] = rf.sublattice_violation;
        out["pt"] = pt;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::EPSingular && e.code() != ErrorCode::ScalarOperator &&
            e.code() != ErrorCode::ZeroMatrix) {
            throw;
        }
        out["pt"] = nullptr;
    }
    return out;
}

void run_simulate(const Context& ctx) {
    const auto& m = ctx.cfg.require_model();
    const SimulateSection sim = ctx.cfg.simulate.value_or(SimulateSection{});
    if (sim.dataset) {
        write_json(ctx.out / "dataset.json", dataset_to_json(simulate_dataset(ctx.cfg, m.delta(), m.eta()), ctx.prov));
        note(ctx, "wrote " + (ctx.out / "dataset.json").string());
    }
    if (sim.images) {
        NoiseConfig noise = ctx.cfg.noise;
        noise.seed = ctx.cfg.seed;
        const auto images = render_images(ModelParams(m.delta(), m.eta()), sim.geometry, noise);
        nlohmann::json prov = nlohmann::json::parse(ctx.prov.to_json().dump());
        write_image_set(ctx.out / "images", images, prov);
        note(ctx, "wrote " + (ctx.out / "images").string());
    }
}

void run_reconstruct(const Context& ctx) {
    if (!ctx.cfg.reconstruct) throw Error(ErrorCode::ConfigError, "reconstruct: missing reconstruct.input");
    const PolarimetrySet data = load_input(ctx.cfg, ctx.cfg.reconstruct->input);
    const BandReconstruction band = reconstruct(ctx.cfg, data);
    write_json(ctx.out / "reconstruction.json", reconstruction_to_json(band, ctx.prov));
    note(ctx, "wrote " + (ctx.out / "reconstruction.json").string());
}

void run_analyze(const Context& ctx) {
    if (!ctx.cfg.analyze) throw Error(ErrorCode::ConfigError, "analyze: missing analyze.input");
    const BandReconstruction band = reconstruction_from_json(read_json(ctx.cfg.analyze->input));
    const ojson a = analyze_band(band, ctx.cfg.analyze->eta, ctx.prov);
    write_json(ctx.out / "analysis.json", a);
    write_text(ctx.out / "band.csv", band_csv(band.q, band.canonicals(), ctx.prov));
    note(ctx, summary_line(a));
}

void run_phase_diagram(const Context& ctx) {
    const PhaseDiagramSection sec = ctx.cfg.phase_diagram.value_or(PhaseDiagramSection{});
    const PhaseDiagram pd = phase_diagram(sec.delta, sec.eta, sec.resolution, sec.n_q);
    write_text(ctx.out / "phase_diagram.csv", phase_diagram_csv(pd, ctx.prov));
    note(ctx, "wrote " + (ctx.out / "phase_diagram.csv").string());
    if (!sec.ep_deltas.empty()) {
        ojson records = ojson::array();
        for (double d : sec.ep_deltas) {
            for (auto& r : ep_json(d)) records.push_back(r);
        }
        write_json(ctx.out / "exceptional_points.json",
                   ojson{{"format", "blochtomo-exceptional-points"}, {"provenance", ctx.prov.to_json()}, {"records", records}});
        note(ctx, "wrote " + (ctx.out / "exceptional_points.json").string());
    }
}

void run_calibrate(const Context& ctx) {
    if (!ctx.cfg.calibrate) throw Error(ErrorCode::ConfigError, "calibrate: missing calibrate.plates");
    const auto& sec = *ctx.cfg.calibrate;
    ojson plates = ojson::array();
    double delta_total = 0.0;
    double eta_total = 0.0;
    for (const auto& r : sec.plates) {
        const double eta = calibrate_eta(r);
        const double plain = calibrate_delta_plain(r);
        ojson p{{"eta", eta}, {"delta_plain", plain}};
        double delta = plain;
        if (sec.dichroic) {
            delta = calibrate_delta_dichroic(r, eta);
            p["delta_dichroic"] = delta;
        }
        delta_total += delta;
        eta_total += eta;
        plates.push_back(p);
    }
    const ojson out{{"format", "blochtomo-calibration"},
                    {"provenance", ctx.prov.to_json()},
                    {"plates", plates},
                    {"total", ojson{{"delta", delta_total}, {"eta", eta_total}}}};
    write_json(ctx.out / "calibration.json", out);
    note(ctx, "delta=" + format_double(delta_total) + " eta=" + format_double(eta_total));
}

void run_pipeline(const Context& ctx) {
    const auto& m = ctx.cfg.require_model();
    const PipelineSection sec = ctx.cfg.pipeline.value_or(PipelineSection{});
    const bool sweep = !sec.eta_sweep.empty();
    const std::vector<double> etas = sweep ? sec.eta_sweep : std::vector<double>{m.eta()};
    ojson pt_scan = ojson::array();
    for (double eta : etas) {
        const fs::path dir = sweep ? ctx.out / ("eta_" + format_double(eta)) : ctx.out;
        const PolarimetrySet data = simulate_dataset(ctx.cfg, m.delta(), eta);
        write_json(dir / "dataset.json", dataset_to_json(data, ctx.prov));
        const BandReconstruction band = reconstruct(ctx.cfg, data);
        write_json(dir / "reconstruction.json", reconstruction_to_json(band, ctx.prov));
        const ojson a = analyze_band(band, eta, ctx.prov);
        write_json(dir / "analysis.json", a);
        write_text(dir / "band.csv", band_csv(band.q, band.canonicals(), ctx.prov));
        if (!a["pt"].is_null()) pt_scan.push_back(a["pt"]);
        note(ctx, summary_line(a));
    }
    write_json(ctx.out / "pt_scan.json", ojson{{"format", "blochtomo-pt-scan"},
                                               {"provenance", ctx.prov.to_json()},
                                               {"delta", m.delta()},
                                               {"entries", pt_scan}});
    write_json(ctx.out / "exceptional_points.json",
               ojson{{"format", "blochtomo-exceptional-points"}, {"provenance", ctx.prov.to_json()}, {"records", ep_json(m.delta())}});
}

}  // namespace blochtomo::cli
