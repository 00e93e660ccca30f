#include "collenc/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace collenc {

namespace {

std::uint32_t byteswap32(std::uint32_t x) {
    return ((x & 0xFFu) << 24) | ((x & 0xFF00u) << 8) | ((x >> 8) & 0xFF00u) | (x >> 24);
}

// Reads one whitespace-delimited header token.
std::string read_token(std::istream& in) {
    std::string tok;
    char c = 0;
    while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {}
    if (!in) return tok;
    tok.push_back(c);
    while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) tok.push_back(c);
    return tok;
}

}  // namespace

void save_pfm(const std::filesystem::path& path, std::span<const double> values, int width,
              int height) {
    if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("save_pfm: data length does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "Pf\n" << width << ' ' << height << "\n-1.0\n";
    std::vector<std::uint32_t> row(static_cast<std::size_t>(width));
    for (int v = height - 1; v >= 0; --v) {
        for (int u = 0; u < width; ++u) {
            const auto f = static_cast<float>(values[static_cast<std::size_t>(v) * width + u]);
            std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
            if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
            row[static_cast<std::size_t>(u)] = bits;
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(std::uint32_t)));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

PfmData load_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string magic = read_token(in);
    if (magic == "PF") throw IoError(path.string() + ": colour PFM is not supported");
    if (magic != "Pf") throw IoError(path.string() + ": not a grayscale PFM");
    PfmData d;
    double scale = 0.0;
    try {
        d.width = std::stoi(read_token(in));
        d.height = std::stoi(read_token(in));
        scale = std::stod(read_token(in));
    } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed PFM header");
    }
    if (d.width <= 0 || d.height <= 0 || scale == 0.0)
        throw IoError(path.string() + ": malformed PFM header");
    // read_token consumed exactly one whitespace byte after the scale.
    const bool file_little = scale < 0.0;
    const bool swap = file_little != (std::endian::native == std::endian::little);

    const auto w = static_cast<std::size_t>(d.width);
    const auto h = static_cast<std::size_t>(d.height);
    std::vector<std::uint32_t> raw(w * h);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
    if (static_cast<std::size_t>(in.gcount()) != raw.size() * sizeof(std::uint32_t))
        throw IoError(path.string() + ": truncated PFM payload");

    d.values.resize(w * h);
    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t v = h - 1 - row;
        for (std::size_t u = 0; u < w; ++u) {
            std::uint32_t bits = raw[row * w + u];
            if (swap) bits = byteswap32(bits);
            d.values[v * w + u] = static_cast<double>(std::bit_cast<float>(bits));
        }
    }
    return d;
}

std::uint8_t quantize_preview(double value, double max_range) {
    if (value == kInvalid || !(max_range > 0.0)) return 0;
    const double q = std::floor(value / max_range * 255.0 + 0.5);
    return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

std::vector<std::uint8_t> to_preview(std::span<const double> values, double max_range) {
    std::vector<std::uint8_t> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [&](double x) { return quantize_preview(x, max_range); });
    return out;
}

void save_pgm(const std::filesystem::path& path, std::span<const std::uint8_t> pixels, int width,
              int height) {
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("save_pgm: data length does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace collenc
