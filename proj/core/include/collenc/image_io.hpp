#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "collenc/image.hpp"

namespace collenc {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grayscale PFM ("Pf"), little-endian (scale -1.0), rows stored bottom to
/// top. Values are written as float32, so a save/load round trip is
/// bit-exact for float-representable data.
void save_pfm(const std::filesystem::path& path, std::span<const double> values, int width,
              int height);

template <class Tag>
void save_image(const std::filesystem::path& path, const Grid<Tag>& image) {
    save_pfm(path, image.values(), image.width(), image.height());
}

struct PfmData {
    int width = 0;
    int height = 0;
    std::vector<double> values;  ///< row-major, top row first
};

/// Accepts both byte orders. Throws IoError on malformed headers, colour
/// PFMs or truncated payloads.
PfmData load_pfm(const std::filesystem::path& path);

template <class Tag = DepthTag>
Grid<Tag> load_image(const std::filesystem::path& path, double max_range = kDefaultMaxRange) {
    PfmData d = load_pfm(path);
    return Grid<Tag>(d.width, d.height, std::move(d.values), max_range);
}

/// 8-bit value for a preview pixel: round-half-up of value / max_range * 255,
/// clamped to [0, 255]; invalid pixels map to 0.
std::uint8_t quantize_preview(double value, double max_range);

std::vector<std::uint8_t> to_preview(std::span<const double> values, double max_range);

/// Binary PGM (P5, maxval 255).
void save_pgm(const std::filesystem::path& path, std::span<const std::uint8_t> pixels, int width,
              int height);

template <class Tag>
void save_preview(const std::filesystem::path& path, const Grid<Tag>& image) {
    save_pgm(path, to_preview(image.values(), image.max_range()), image.width(), image.height());
}

}  // namespace collenc
