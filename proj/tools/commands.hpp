// commands.hpp — the blochtomo subcommands

#pragma once

#include "run_config.hpp"

#include <blochtomo/serialization.hpp>

#include <filesystem>
#include <optional>
#include <ostream>

namespace blochtomo::cli {

struct Context {
    RunConfig cfg;
    std::filesystem::path out;
    Provenance prov;
    std::ostream* log = nullptr;
};

void run_simulate(const Context& ctx);
void run_reconstruct(const Context& ctx);
void run_analyze(const Context& ctx);
void run_phase_diagram(const Context& ctx);
void run_calibrate(const Context& ctx);
void run_pipeline(const Context& ctx);

/// Winding, EP suspects, critical momentum and the PT classification of one
/// reconstructed band.
ojson analyze_band(const BandReconstruction& band, std::optional<double> eta, const Provenance& prov);

}  // namespace blochtomo::cli
