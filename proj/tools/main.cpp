// blochtomo — simulate, reconstruct and analyze non-Hermitian quantum-walk bands
//
//   blochtomo <simulate|reconstruct|analyze|phase-diagram|calibrate|pipeline>
//             --config FILE [--seed N] [--out DIR]
//
// Output directory: --out, else outputs.directory from the config, else
// $BLOCHTOMO_OUTPUT_ROOT/<command>, else ./blochtomo-out/<command>.

#include "commands.hpp"

#include <blochtomo/errors.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace blochtomo;
using namespace blochtomo::cli;

namespace {

constexpr const char* kUnits =
    "Angles (delta, q, phi) are in radians; eta is dimensionless.  Configs are JSON; unknown keys are rejected.";

fs::path output_dir(const std::string& command, const std::string& flag, const RunConfig& cfg) {
    if (!flag.empty()) return flag;
    if (cfg.output_dir) return *cfg.output_dir;
    if (const char* root = std::getenv("BLOCHTOMO_OUTPUT_ROOT"); root && *root) return fs::path(root) / command;
    return fs::path("blochtomo-out") / command;
}

void report_error(const std::string& command, std::string_view code, const std::string& message,
                  const fs::path& out) {
    const ojson err{{"error", ojson{{"command", command}, {"code", code}, {"message", message}}}};
    std::cerr << err.dump() << '\n';
    if (out.empty()) return;
    try {
        write_text(out / "error.json", err.dump(2) + "\n");
    } catch (...) {
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tomography and topology of a non-Hermitian photonic quantum walk.\n" + std::string(kUnits)};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_flag;
    std::optional<std::uint64_t> seed;

    const std::map<std::string, std::pair<std::string, std::function<void(const Context&)>>> commands{
        {"simulate", {"Synthesize a polarimetry dataset and optionally camera images", run_simulate}},
        {"reconstruct", {"Reconstruct U(q) from a dataset JSON or an image-set directory", run_reconstruct}},
        {"analyze", {"Winding, EP suspects, PT phase and band CSV of a reconstruction", run_analyze}},
        {"phase-diagram", {"Winding number over a (delta, eta) grid, plus EP records", run_phase_diagram}},
        {"calibrate", {"Plate delta and eta from bench intensity readings", run_calibrate}},
        {"pipeline", {"simulate -> reconstruct -> analyze with one seed", run_pipeline}},
    };
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Seed for noise and solver restarts (overrides the config)");
        sub->add_option("--out", out_flag, "Output directory");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    fs::path out = out_flag;
    try {
        Context ctx;
        ctx.cfg = load_run_config(config_path);
        if (seed) ctx.cfg.seed = *seed;
        ctx.cfg.source["seed"] = ctx.cfg.seed;
        out = output_dir(command, out_flag, ctx.cfg);
        ctx.out = out;
        ctx.prov = Provenance{config_hash(ctx.cfg.source), ctx.cfg.seed};
        ctx.log = &std::cout;
        fs::create_directories(out);
        commands.at(command).second(ctx);
    } catch (const Error& e) {
        report_error(command, to_string(e.code()), e.what(), out);
        return 1;
    } catch (const std::exception& e) {
        report_error(command, "Internal", e.what(), out);
        return 1;
    }
    return 0;
}
