#include "blochtomo/serialization.hpp"

#include "blochtomo/errors.hpp"

#include <openssl/sha.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace blochtomo {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDatasetFormat = "blochtomo-dataset";
constexpr const char* kReconstructionFormat = "blochtomo-reconstruction";

ojson nullable_complex(std::optional<cplx> z) {
    return z ? complex_to_json(*z) : ojson(nullptr);
}

ojson vec3_to_json(const Vec3& v) {
    ojson arr = ojson::array();
    for (int l = 0; l < 3; ++l) arr.push_back(complex_to_json(v(l)));
    return arr;
}

Vec3 vec3_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw Error(ErrorCode::IoError, "expected a 3-vector of [re, im] pairs");
    }
    return Vec3(complex_from_json(j[0]), complex_from_json(j[1]), complex_from_json(j[2]));
}

template <typename Fn>
auto parse_guard(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, std::string(what) + ": " + e.what());
    }
}

}  // namespace

ojson Provenance::to_json() const {
    return ojson{{"config_hash", config_hash}, {"seed", seed}, {"version", library_version()}};
}

Provenance Provenance::from_json(const nlohmann::json& j) {
    return parse_guard("provenance", [&] {
        Provenance p;
        p.config_hash = j.at("config_hash").get<std::string>();
        p.seed = j.at("seed").get<std::uint64_t>();
        return p;
    });
}

std::string config_hash(const nlohmann::json& config) {
    const std::string text = config.dump();
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest);
    char hex[2 * SHA256_DIGEST_LENGTH + 1];
    for (int i = 0; i < SHA256_DIGEST_LENGTH; ++i) {
        std::snprintf(hex + 2 * i, 3, "%02x", digest[i]);
    }
    return std::string(hex, 16);
}

std::string library_version() { return BLOCHTOMO_VERSION; }

ojson complex_to_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

cplx complex_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw Error(ErrorCode::IoError, "expected a complex number as [re, im]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

ojson dataset_to_json(const PolarimetrySet& data, const Provenance& prov) {
    ojson records = ojson::array();
    const auto& chans = channels();
    for (const auto& rec : data.records) {
        ojson ratios = ojson::object();
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            const double v = rec.ratios[c];
            ratios[chans[c].key()] = std::isfinite(v) ? ojson(v) : ojson(nullptr);
        }
        ojson r{{"k", rec.k}, {"q", rec.q}, {"ratios", ratios}};
        if (rec.dark) r["dark"] = true;
        records.push_back(std::move(r));
    }
    return ojson{{"format", kDatasetFormat}, {"provenance", prov.to_json()}, {"records", records}};
}

PolarimetrySet dataset_from_json(const nlohmann::json& j) {
    return parse_guard("dataset", [&] {
        const nlohmann::json& records = j.is_array() ? j : j.at("records");
        if (!j.is_array() && j.at("format") != kDatasetFormat) {
            throw Error(ErrorCode::IoError, "dataset: unexpected format tag");
        }
        PolarimetrySet set;
        const auto& chans = channels();
        for (const auto& r : records) {
            PolarimetryRecord rec;
            rec.k = r.at("k").get<int>();
            rec.q = r.at("q").get<double>();
            rec.dark = r.value("dark", false);
            const auto& ratios = r.at("ratios");
            if (ratios.size() != kChannelCount) {
                throw Error(ErrorCode::IoError, "dataset: each record needs 18 ratios");
            }
            for (std::size_t c = 0; c < kChannelCount; ++c) {
                const auto& v = ratios.at(chans[c].key());
                rec.ratios[c] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
                if (v.is_null()) rec.dark = true;
            }
            set.records.push_back(rec);
        }
        return set;
    });
}

ojson reconstruction_to_json(const BandReconstruction& band, const Provenance& prov) {
    ojson pixels = ojson::array();
    for (std::size_t k = 0; k < band.pixels.size(); ++k) {
        const auto& px = band.pixels[k];
        ojson flags = ojson::array();
        if (px.flags.converged) flags.push_back("converged");
        if (px.flags.ep_suspect) flags.push_back("ep_suspect");
        if (px.flags.dark_input) flags.push_back("dark_input");
        const auto& bl = band.bloch[k];
        pixels.push_back(ojson{
            {"q", band.q[k]},
            {"m0", complex_to_json(px.canonical.m0)},
            {"m", vec3_to_json(px.canonical.m)},
            {"E", nullable_complex(bl ? std::optional<cplx>(bl->energy) : std::nullopt)},
            {"n", bl ? vec3_to_json(bl->n) : ojson(nullptr)},
            {"residual", px.residual},
            {"iterations", px.iterations},
            {"flags", flags},
        });
    }
    return ojson{{"format", kReconstructionFormat}, {"provenance", prov.to_json()}, {"pixels", pixels}};
}

BandReconstruction reconstruction_from_json(const nlohmann::json& j) {
    return parse_guard("reconstruction", [&] {
        if (j.at("format") != kReconstructionFormat) {
            throw Error(ErrorCode::IoError, "reconstruction: unexpected format tag");
        }
        BandReconstruction band;
        for (const auto& p : j.at("pixels")) {
            band.q.push_back(p.at("q").get<double>());
            ReconstructionResult res;
            res.canonical.m0 = complex_from_json(p.at("m0"));
            res.canonical.m = vec3_from_json(p.at("m"));
            res.residual = p.at("residual").get<double>();
            res.iterations = p.value("iterations", 0);
            for (const auto& f : p.at("flags")) {
                const auto s = f.get<std::string>();
                if (s == "converged") res.flags.converged = true;
                else if (s == "ep_suspect") res.flags.ep_suspect = true;
                else if (s == "dark_input") res.flags.dark_input = true;
                else throw Error(ErrorCode::IoError, "reconstruction: unknown flag " + s);
            }
            band.pixels.push_back(res);
            if (p.at("E").is_null() || p.at("n").is_null()) {
                band.bloch.emplace_back(std::nullopt);
            } else {
                band.bloch.emplace_back(BlochDecomposition{complex_from_json(p.at("E")), vec3_from_json(p.at("n"))});
            }
        }
        return band;
    });
}

ojson ep_records_to_json(double delta, std::span<const EPRecord> records) {
    ojson arr = ojson::array();
    for (const auto& r : records) {
        arr.push_back(ojson{{"delta", delta},
                            {"q_c", r.q_c},
                            {"eta_c", r.eta_c},
                            {"branch", r.branch == EPBranch::ZA ? "z_a" : "z_b"},
                            {"residual", r.residual}});
    }
    return arr;
}

ojson pt_entry_to_json(const PTScanEntry& entry) {
    const auto& c = entry.classification;
    return ojson{{"eta", entry.eta},
                 {"q_c", entry.q},
                 {"phi", c.decomposition.phi},
                 {"phi_prime", c.decomposition.phi_prime},
                 {"a", c.decomposition.a},
                 {"b", c.decomposition.b},
                 {"order_parameter", c.order_parameter},
                 {"phase", to_string(c.phase)},
                 {"purity", to_string(c.purity)},
                 {"lambda", ojson::array({complex_to_json(c.lambda1), complex_to_json(c.lambda2)})}};
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string phase_diagram_csv(const PhaseDiagram& pd, const Provenance& prov) {
    std::ostringstream out;
    out << "# config_hash=" << prov.config_hash << " seed=" << prov.seed << '\n';
    out << "delta,eta,nu_re,nu_im\n";
    const std::size_t ne = pd.eta_grid.size();
    for (std::size_t i = 0; i < pd.delta_grid.size(); ++i) {
        for (std::size_t j = 0; j < ne; ++j) {
            out << format_double(pd.delta_grid[i]) << ',' << format_double(pd.eta_grid[j]) << ','
                << format_double(pd.nu[i * ne + j]) << ',' << format_double(pd.nu_imag_residual[i * ne + j])
                << '\n';
        }
    }
    return out.str();
}

std::string band_csv(std::span<const double> q, std::span<const CanonicalStep> steps, const Provenance& prov) {
    std::ostringstream out;
    out << "# config_hash=" << prov.config_hash << " seed=" << prov.seed << '\n';
    out << "q,re_E,im_E,re_nx,im_nx,re_ny,im_ny,re_nz,im_nz,infidelity,s1,s2,s3\n";
    for (std::size_t k = 0; k < steps.size(); ++k) {
        out << format_double(q[k]);
        try {
            const BlochDecomposition b = bloch_from_canonical(steps[k]);
            out << ',' << format_double(b.energy.real()) << ',' << format_double(b.energy.imag());
            for (int l = 0; l < 3; ++l) {
                out << ',' << format_double(b.n(l).real()) << ',' << format_double(b.n(l).imag());
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EPSingular && e.code() != ErrorCode::ScalarOperator) throw;
            out << ",,,,,,,,";
        }
        const Eigensystem es = eigensystem(steps[k]);
        const Eigen::Vector3d s = stokes(es.psi1);
        out << ',' << format_double(1.0 - state_fidelity(es.psi1, es.psi2)) << ',' << format_double(s(0)) << ','
            << format_double(s(1)) << ',' << format_double(s(2)) << '\n';
    }
    return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + path.string());
    }
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, path.string() + ": " + e.what());
    }
}

}  // namespace blochtomo
