// polarimetry.hpp — forward measurement model for momentum-resolved process tomography
//
// Eighteen polarimetric channels: inputs {L, H, D} times projections
// {L, R, H, V, D, A}.  Each intensity is normalized by the sum with its
// orthogonal projection, so the ratios are blind to the overall scale of U.

#pragma once

#include "blochtomo/spectral.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blochtomo {

enum class Polarization { L, R, H, V, D, A };

inline constexpr std::array<Polarization, 3> kInputStates{
    Polarization::L, Polarization::H, Polarization::D};
inline constexpr std::array<Polarization, 6> kProjectionStates{
    Polarization::L, Polarization::R, Polarization::H,
    Polarization::V, Polarization::D, Polarization::A};

inline constexpr std::size_t kChannelCount = 18;

char label(Polarization p) noexcept;
Polarization polarization_from_label(char c);
Polarization orthogonal(Polarization p) noexcept;

/// Unit ket in the (L, R) coin basis.
Vec2 ket(Polarization p);

struct Channel {
    Polarization input;
    Polarization projection;

    /// Two-letter key, e.g. "DA".
    std::string key() const;
};

/// The 18 channels in canonical order LL, LR, LH, LV, LD, LA, HL, ..., DA.
const std::array<Channel, kChannelCount>& channels();

/// Index of the channel measuring the orthogonal projection of the same input.
constexpr std::size_t partner_channel(std::size_t index) noexcept { return index ^ 1u; }

using RatioSet = std::array<double, kChannelCount>;
using IntensitySet = std::array<double, kChannelCount>;

/// I = i0 |<j|u|i>|^2, not renormalized.
double intensity(const Mat2& u, Polarization input, Polarization projection, double i0 = 1.0);

IntensitySet raw_intensities(const Mat2& u, double i0 = 1.0);

/// Pairwise normalization I_ij / (I_ij + I_ij_perp).  Throws DarkInput when a
/// pair sums to zero (relative to the largest intensity in the set).
RatioSet ratios_from_intensities(const IntensitySet& raw);

RatioSet normalized_set(const Mat2& u);

struct NoiseConfig {
    double gaussian_sigma = 0.0;           // relative multiplicative noise
    std::optional<double> photon_budget;   // mean counts at I = i0
    std::uint64_t seed = 0;

    bool noiseless() const { return gaussian_sigma == 0.0 && !photon_budget; }
    void validate() const;
};

/// splitmix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

struct PolarimetryRecord {
    int k = 0;
    double q = 0.0;
    RatioSet ratios{};
    bool dark = false;
};

struct PolarimetrySet {
    std::vector<PolarimetryRecord> records;

    std::size_t size() const { return records.size(); }
};

/// Uniform grid q_k = 2 pi k / n_q.
std::vector<double> uniform_grid(int n_q);

/// Noisy (or exact) ratio dataset over the Brillouin zone.  Each channel owns a
/// random stream derived from the master seed, so the output does not depend
/// on evaluation order.
PolarimetrySet synthesize_dataset(const ModelParams& p, int n_q, const NoiseConfig& noise);

// ---------------------------------------------------------------------------
// Camera images

struct ImageGeometry {
    int width = 1080;
    int height = 1080;
    int bz_width_px = 1080;     // pixels per spatial period
    double waist_px = 1080.0;   // Gaussian beam waist, >= bz_width_px
    double i0 = 1.0;
    int grid = 90;              // compressed grid size

    void validate() const;
};

struct IntensityImage {
    int width = 0;
    int height = 0;
    int bz_width_px = 0;
    Polarization input = Polarization::L;
    Polarization projection = Polarization::L;
    std::vector<double> values;  // row-major, values[y * width + x]

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::string key() const { return Channel{input, projection}.key(); }
};

/// Quasi-momentum of pixel column x (sampled at the pixel center).
double column_quasimomentum(int x, int bz_width_px);

/// Eighteen images A(x,y)^2 |<j|U(q(x))|i>|^2, channel order as channels().
std::vector<IntensityImage> render_images(const ModelParams& p, const ImageGeometry& geometry,
                                          const NoiseConfig& noise);

/// Compresses each image to grid x grid blocks (block average), sums each
/// compressed column over y and normalizes by channel pair.  Columns whose
/// pair is dark are flagged, not thrown.
PolarimetrySet ingest_images(std::span<const IntensityImage> images, int grid = 90);

}  // namespace blochtomo
