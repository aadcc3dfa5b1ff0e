// image_io.hpp — 16-bit PGM image sets with a JSON sidecar
//
// A set is a directory holding <input><projection>.pgm for all 18 channels and
// meta.json with the geometry and the per-image scale that maps 16-bit counts
// back to intensity units.

#pragma once

#include "blochtomo/polarimetry.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <vector>

namespace blochtomo {

struct Pgm16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> pixels;  // row-major
};

void write_pgm16(const std::filesystem::path& path, const Pgm16& image);
Pgm16 read_pgm16(const std::filesystem::path& path);

/// Writes the 18 images and meta.json.  `provenance` is copied into meta.json.
void write_image_set(const std::filesystem::path& dir, std::span<const IntensityImage> images,
                     const nlohmann::json& provenance = nlohmann::json::object());

std::vector<IntensityImage> read_image_set(const std::filesystem::path& dir);

}  // namespace blochtomo
