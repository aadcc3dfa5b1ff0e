// serialization.hpp — JSON and CSV artifacts
//
// Every artifact carries a provenance block (config hash, seed, version) so a
// file can be traced back to the run that produced it.  Doubles are written
// with round-trip precision; identical inputs give byte-identical files.

#pragma once

#include "blochtomo/polarimetry.hpp"
#include "blochtomo/pt_symmetry.hpp"
#include "blochtomo/tomography.hpp"
#include "blochtomo/topology.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blochtomo {

using ojson = nlohmann::ordered_json;

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;

    ojson to_json() const;
    static Provenance from_json(const nlohmann::json& j);
};

/// First 16 hex digits of the SHA-256 of the compact dump.
std::string config_hash(const nlohmann::json& config);

std::string library_version();

ojson complex_to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);

/// {"format": "blochtomo-dataset", "provenance": ..., "records": [...]}.
/// Each record: {"k", "q", "ratios": {LL..DA}} plus "dark": true when dark.
ojson dataset_to_json(const PolarimetrySet& data, const Provenance& prov);

/// Accepts the wrapped object or a bare record array.
PolarimetrySet dataset_from_json(const nlohmann::json& j);

ojson reconstruction_to_json(const BandReconstruction& band, const Provenance& prov);
BandReconstruction reconstruction_from_json(const nlohmann::json& j);

ojson ep_records_to_json(double delta, std::span<const EPRecord> records);

struct PTScanEntry {
    double eta = 0.0;
    double q = 0.0;
    PTClassification classification;
};

ojson pt_entry_to_json(const PTScanEntry& entry);

/// delta,eta,nu_re,nu_im rows after a '#' provenance line.
std::string phase_diagram_csv(const PhaseDiagram& pd, const Provenance& prov);

/// Plot-ready band table: q, Re/Im E, Re/Im n_x/y/z, infidelity and the
/// Stokes vector of the first H_eff eigenvector.  Singular rows are blank.
std::string band_csv(std::span<const double> q, std::span<const CanonicalStep> steps, const Provenance& prov);

/// Shortest round-trip decimal form.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace blochtomo
