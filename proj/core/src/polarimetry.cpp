#include "blochtomo/polarimetry.hpp"

#include "blochtomo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace blochtomo {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// A pair whose sum falls below this fraction of the brightest channel is dark.
constexpr double kDarkFraction = 1e-14;

std::size_t projection_index(Polarization p) noexcept {
    return static_cast<std::size_t>(p);
}

double apply_noise(double value, double i0, const NoiseConfig& noise, std::mt19937_64& gen) {
    if (noise.gaussian_sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        value *= std::max(0.0, 1.0 + noise.gaussian_sigma * gauss(gen));
    }
    if (noise.photon_budget) {
        const double mean = *noise.photon_budget * value / i0;
        std::poisson_distribution<long long> shots(std::max(mean, 0.0));
        value = static_cast<double>(mean > 0.0 ? shots(gen) : 0) * i0 / *noise.photon_budget;
    }
    return value;
}

}  // namespace

char label(Polarization p) noexcept {
    static constexpr char labels[] = {'L', 'R', 'H', 'V', 'D', 'A'};
    return labels[projection_index(p)];
}

Polarization polarization_from_label(char c) {
    switch (c) {
        case 'L': return Polarization::L;
        case 'R': return Polarization::R;
        case 'H': return Polarization::H;
        case 'V': return Polarization::V;
        case 'D': return Polarization::D;
        case 'A': return Polarization::A;
        default: break;
    }
    throw Error(ErrorCode::ConfigError, std::string("unknown polarization label '") + c + "'");
}

Polarization orthogonal(Polarization p) noexcept {
    return static_cast<Polarization>(projection_index(p) ^ 1u);
}

Vec2 ket(Polarization p) {
    const Vec2 l(1.0, 0.0);
    const Vec2 r(0.0, 1.0);
    switch (p) {
        case Polarization::L: return l;
        case Polarization::R: return r;
        case Polarization::H: return (l + r) * kInvSqrt2;
        case Polarization::V: return (l - r) * (kInvSqrt2 / kI);
        case Polarization::D: return (l + kI * r) * kInvSqrt2;
        case Polarization::A: return (l - kI * r) * kInvSqrt2;
    }
    return l;
}

std::string Channel::key() const {
    return {label(input), label(projection)};
}

const std::array<Channel, kChannelCount>& channels() {
    static const std::array<Channel, kChannelCount> table = [] {
        std::array<Channel, kChannelCount> out{};
        std::size_t idx = 0;
        for (Polarization in : kInputStates) {
            for (Polarization proj : kProjectionStates) {
                out[idx++] = Channel{in, proj};
            }
        }
        return out;
    }();
    return table;
}

double intensity(const Mat2& u, Polarization input, Polarization projection, double i0) {
    return i0 * std::norm(ket(projection).dot(u * ket(input)));
}

IntensitySet raw_intensities(const Mat2& u, double i0) {
    IntensitySet out{};
    const auto& table = channels();
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        out[c] = intensity(u, table[c].input, table[c].projection, i0);
    }
    return out;
}

RatioSet ratios_from_intensities(const IntensitySet& raw) {
    const double brightest = *std::max_element(raw.begin(), raw.end());
    RatioSet out{};
    for (std::size_t c = 0; c < kChannelCount; c += 2) {
        const double sum = raw[c] + raw[c + 1];
        if (!(sum > kDarkFraction * brightest) || sum <= 0.0) {
            throw Error(ErrorCode::DarkInput,
                        "input " + std::string(1, label(channels()[c].input)) +
                            " is extinguished in the " + channels()[c].key() + "/" +
                            channels()[c + 1].key() + " pair");
        }
        out[c] = raw[c] / sum;
        out[c + 1] = raw[c + 1] / sum;
    }
    return out;
}

RatioSet normalized_set(const Mat2& u) {
    return ratios_from_intensities(raw_intensities(u));
}

void NoiseConfig::validate() const {
    if (!(gaussian_sigma >= 0.0) || !std::isfinite(gaussian_sigma)) {
        throw Error(ErrorCode::ConfigError, "noise.gaussian_sigma must be >= 0");
    }
    if (photon_budget && !(*photon_budget > 0.0)) {
        throw Error(ErrorCode::ConfigError, "noise.photon_budget must be > 0");
    }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::vector<double> uniform_grid(int n_q) {
    std::vector<double> q(static_cast<std::size_t>(std::max(n_q, 0)));
    for (int k = 0; k < n_q; ++k) {
        q[static_cast<std::size_t>(k)] = kTwoPi * k / n_q;
    }
    return q;
}

PolarimetrySet synthesize_dataset(const ModelParams& p, int n_q, const NoiseConfig& noise) {
    if (n_q < 2) {
        throw Error(ErrorCode::GridError, "synthesize_dataset: n_q must be >= 2");
    }
    noise.validate();
    const auto grid = uniform_grid(n_q);
    const auto coeffs = hopping_from_params(p);

    std::vector<IntensitySet> raw(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        raw[k] = raw_intensities(step_operator(coeffs, Quasimomentum(grid[k])));
    }
    if (!noise.noiseless()) {
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            std::mt19937_64 gen(mix_seed(noise.seed, c));
            for (auto& row : raw) {
                row[c] = apply_noise(row[c], 1.0, noise, gen);
            }
        }
    }

    PolarimetrySet out;
    out.records.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        PolarimetryRecord rec;
        rec.k = static_cast<int>(k);
        rec.q = grid[k];
        rec.ratios = ratios_from_intensities(raw[k]);
        out.records.push_back(rec);
    }
    return out;
}

void ImageGeometry::validate() const {
    if (grid < 2) {
        throw Error(ErrorCode::GeometryError, "geometry: grid must be >= 2");
    }
    if (bz_width_px < grid || width < bz_width_px) {
        throw Error(ErrorCode::GeometryError,
                    "geometry: require width >= bz_width_px >= grid (" + std::to_string(width) +
                        ", " + std::to_string(bz_width_px) + ", " + std::to_string(grid) + ")");
    }
    if (height < grid) {
        throw Error(ErrorCode::GeometryError, "geometry: height must be >= grid");
    }
    if (!(waist_px >= bz_width_px)) {
        throw Error(ErrorCode::GeometryError, "geometry: beam waist must cover one period");
    }
    if (!(i0 > 0.0)) {
        throw Error(ErrorCode::GeometryError, "geometry: i0 must be > 0");
    }
}

double column_quasimomentum(int x, int bz_width_px) {
    return wrap_angle(kTwoPi * (x + 0.5) / bz_width_px);
}

std::vector<IntensityImage> render_images(const ModelParams& p, const ImageGeometry& geometry,
                                          const NoiseConfig& noise) {
    geometry.validate();
    noise.validate();
    const auto coeffs = hopping_from_params(p);
    const int w = geometry.width;
    const int h = geometry.height;

    std::vector<IntensitySet> column(static_cast<std::size_t>(w));
    for (int x = 0; x < w; ++x) {
        const Mat2 u = step_operator(coeffs, Quasimomentum(column_quasimomentum(x, geometry.bz_width_px)));
        column[static_cast<std::size_t>(x)] = raw_intensities(u, geometry.i0);
    }

    // |A(x,y)|^2 of a centered Gaussian beam, separable in x and y.
    const double cx = 0.5 * w;
    const double cy = 0.5 * h;
    const double inv_w2 = 1.0 / (geometry.waist_px * geometry.waist_px);
    std::vector<double> env_x(static_cast<std::size_t>(w));
    std::vector<double> env_y(static_cast<std::size_t>(h));
    for (int x = 0; x < w; ++x) {
        const double dx = x + 0.5 - cx;
        env_x[static_cast<std::size_t>(x)] = std::exp(-2.0 * dx * dx * inv_w2);
    }
    for (int y = 0; y < h; ++y) {
        const double dy = y + 0.5 - cy;
        env_y[static_cast<std::size_t>(y)] = std::exp(-2.0 * dy * dy * inv_w2);
    }

    std::vector<IntensityImage> images;
    images.reserve(kChannelCount);
    const auto& table = channels();
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        IntensityImage img;
        img.width = w;
        img.height = h;
        img.bz_width_px = geometry.bz_width_px;
        img.input = table[c].input;
        img.projection = table[c].projection;
        img.values.resize(static_cast<std::size_t>(w) * h);
        std::mt19937_64 gen(mix_seed(noise.seed, c));
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double v = env_y[static_cast<std::size_t>(y)] * env_x[static_cast<std::size_t>(x)] *
                           column[static_cast<std::size_t>(x)][c];
                if (!noise.noiseless()) {
                    v = apply_noise(v, geometry.i0, noise, gen);
                }
                img.values[static_cast<std::size_t>(y) * w + x] = v;
            }
        }
        images.push_back(std::move(img));
    }
    return images;
}

PolarimetrySet ingest_images(std::span<const IntensityImage> images, int grid) {
    if (images.size() != kChannelCount) {
        throw Error(ErrorCode::GeometryError,
                    "ingest_images: expected 18 images, got " + std::to_string(images.size()));
    }
    if (grid < 2) {
        throw Error(ErrorCode::GeometryError, "ingest_images: grid must be >= 2");
    }
    const int w = images[0].width;
    const int h = images[0].height;
    const int bz = images[0].bz_width_px;
    if (w < grid || h < grid || bz <= 0) {
        throw Error(ErrorCode::GeometryError, "ingest_images: image smaller than the grid");
    }

    // Images may arrive in any order; index them by channel.
    std::array<const IntensityImage*, kChannelCount> by_channel{};
    const auto& table = channels();
    for (const auto& img : images) {
        if (img.width != w || img.height != h || img.bz_width_px != bz ||
            img.values.size() != static_cast<std::size_t>(w) * h) {
            throw Error(ErrorCode::GeometryError, "ingest_images: images do not share geometry");
        }
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            if (table[c].input == img.input && table[c].projection == img.projection) {
                if (by_channel[c] != nullptr) {
                    throw Error(ErrorCode::GeometryError, "ingest_images: duplicate channel " + img.key());
                }
                by_channel[c] = &img;
            }
        }
    }
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        if (by_channel[c] == nullptr) {
            throw Error(ErrorCode::GeometryError, "ingest_images: missing channel " + table[c].key());
        }
    }

    auto edge = [](int i, int n, int g) { return static_cast<int>((static_cast<long long>(i) * n) / g); };

    PolarimetrySet out;
    out.records.resize(static_cast<std::size_t>(grid));
    std::vector<IntensitySet> column_sums(static_cast<std::size_t>(grid));
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        const IntensityImage& img = *by_channel[c];
        for (int bx = 0; bx < grid; ++bx) {
            const int x0 = edge(bx, w, grid);
            const int x1 = edge(bx + 1, w, grid);
            double column_total = 0.0;
            for (int by = 0; by < grid; ++by) {
                const int y0 = edge(by, h, grid);
                const int y1 = edge(by + 1, h, grid);
                double block = 0.0;
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        block += img.at(x, y);
                    }
                }
                column_total += block / static_cast<double>((x1 - x0) * (y1 - y0));
            }
            column_sums[static_cast<std::size_t>(bx)][c] = column_total;
        }
    }

    for (int bx = 0; bx < grid; ++bx) {
        auto& rec = out.records[static_cast<std::size_t>(bx)];
        rec.k = bx;
        const double center = 0.5 * (edge(bx, w, grid) + edge(bx + 1, w, grid));
        rec.q = wrap_angle(kTwoPi * center / bz);
        try {
            rec.ratios = ratios_from_intensities(column_sums[static_cast<std::size_t>(bx)]);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DarkInput) throw;
            rec.dark = true;
            rec.ratios.fill(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return out;
}

}  // namespace blochtomo
