#include "blochtomo/image_io.hpp"

#include "blochtomo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace blochtomo {

namespace fs = std::filesystem;

namespace {

constexpr double kMaxCount = 65535.0;

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    char ch;
    while (in.get(ch)) {
        if (ch == '#') {
            std::string ignored;
            std::getline(in, ignored);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(ch);
    }
    return token;
}

}  // namespace

void write_pgm16(const fs::path& path, const Pgm16& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    out << "P5\n" << image.width << ' ' << image.height << "\n65535\n";
    std::vector<unsigned char> bytes(image.pixels.size() * 2);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        bytes[2 * i] = static_cast<unsigned char>(image.pixels[i] >> 8);
        bytes[2 * i + 1] = static_cast<unsigned char>(image.pixels[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + path.string());
    }
}

Pgm16 read_pgm16(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    if (next_token(in) != "P5") {
        throw Error(ErrorCode::IoError, path.string() + ": not a binary PGM");
    }
    Pgm16 img;
    try {
        img.width = std::stoi(next_token(in));
        img.height = std::stoi(next_token(in));
        if (std::stoi(next_token(in)) != 65535) {
            throw Error(ErrorCode::IoError, path.string() + ": expected maxval 65535");
        }
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::IoError, path.string() + ": malformed PGM header");
    }
    if (img.width <= 0 || img.height <= 0) {
        throw Error(ErrorCode::IoError, path.string() + ": bad dimensions");
    }
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    std::vector<unsigned char> bytes(n * 2);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw Error(ErrorCode::IoError, path.string() + ": truncated pixel data");
    }
    img.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.pixels[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
    }
    return img;
}

void write_image_set(const fs::path& dir, std::span<const IntensityImage> images,
                     const nlohmann::json& provenance) {
    if (images.empty()) {
        throw Error(ErrorCode::GeometryError, "write_image_set: no images");
    }
    fs::create_directories(dir);
    nlohmann::json meta = provenance.is_object() ? provenance : nlohmann::json::object();
    meta["width"] = images[0].width;
    meta["height"] = images[0].height;
    meta["bz_width_px"] = images[0].bz_width_px;
    meta["format"] = "pgm16";
    nlohmann::json channel_meta = nlohmann::json::object();
    for (const auto& img : images) {
        const double peak = img.values.empty() ? 0.0 : *std::max_element(img.values.begin(), img.values.end());
        const double scale = peak > 0.0 ? peak / kMaxCount : 1.0;
        Pgm16 pgm{img.width, img.height, std::vector<std::uint16_t>(img.values.size())};
        for (std::size_t i = 0; i < img.values.size(); ++i) {
            const double counts = std::clamp(std::round(img.values[i] / scale), 0.0, kMaxCount);
            pgm.pixels[i] = static_cast<std::uint16_t>(counts);
        }
        const std::string file = img.key() + ".pgm";
        write_pgm16(dir / file, pgm);
        channel_meta[img.key()] = {{"file", file}, {"scale", scale}};
    }
    meta["channels"] = channel_meta;
    std::ofstream out(dir / "meta.json");
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + (dir / "meta.json").string());
    }
    out << meta.dump(2) << '\n';
}

std::vector<IntensityImage> read_image_set(const fs::path& dir) {
    std::ifstream in(dir / "meta.json");
    if (!in) {
        throw Error(ErrorCode::IoError, "missing " + (dir / "meta.json").string());
    }
    nlohmann::json meta;
    try {
        in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, "meta.json: " + std::string(e.what()));
    }
    std::vector<IntensityImage> images;
    try {
        const int width = meta.at("width").get<int>();
        const int height = meta.at("height").get<int>();
        const int bz = meta.at("bz_width_px").get<int>();
        for (const auto& ch : channels()) {
            const auto& entry = meta.at("channels").at(ch.key());
            const Pgm16 pgm = read_pgm16(dir / entry.at("file").get<std::string>());
            if (pgm.width != width || pgm.height != height) {
                throw Error(ErrorCode::GeometryError, ch.key() + ".pgm does not match meta.json geometry");
            }
            const double scale = entry.at("scale").get<double>();
            IntensityImage img;
            img.width = width;
            img.height = height;
            img.bz_width_px = bz;
            img.input = ch.input;
            img.projection = ch.projection;
            img.values.resize(pgm.pixels.size());
            for (std::size_t i = 0; i < pgm.pixels.size(); ++i) {
                img.values[i] = pgm.pixels[i] * scale;
            }
            images.push_back(std::move(img));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, "meta.json: " + std::string(e.what()));
    }
    return images;
}

}  // namespace blochtomo
