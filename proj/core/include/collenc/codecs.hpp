#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "collenc/image.hpp"

namespace collenc {

/// Plain real-valued raster for the task-agnostic codecs. Unlike DepthImage
/// it carries no validity convention: invalid depth is just 0.0 here.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    Plane() = default;
    Plane(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}
    Plane(int w, int h, std::vector<double> v);
    template <class Tag>
    explicit Plane(const Grid<Tag>& g) : Plane(g.width(), g.height(), {g.values().begin(), g.values().end()}) {}

    [[nodiscard]] std::size_t size() const { return values.size(); }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    [[nodiscard]] double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

using Complex = std::complex<double>;

/// Full 2D DFT, row-major (ky outer, kx inner).
struct Spectrum {
    int width = 0;
    int height = 0;
    std::vector<Complex> bins;
};

/// Unnormalized forward transform: a constant c maps to c*W*H at DC.
Spectrum fft2_forward(const Plane& image);
/// Inverse with the 1/(W*H) factor.
std::vector<Complex> fft2_inverse(const Spectrum& spectrum);

/// Flat index of the Hermitian partner of bin `index` for real input.
std::size_t conjugate_bin(std::size_t index, int width, int height);

struct SparseSpectrum {
    int width = 0;
    int height = 0;
    std::size_t budget = 0;  ///< real-value budget n; at most n/2 entries
    std::vector<std::pair<std::uint32_t, Complex>> entries;

    friend bool operator==(const SparseSpectrum&, const SparseSpectrum&) = default;
};

/// Keeps the n/2 largest-magnitude bins of the Hermitian-unique half
/// spectrum (ties: lower flat index first). Conjugate partners are implied
/// and not charged. n must be even and >= 2; budgets beyond the number of
/// unique bins are lossless.
SparseSpectrum fft_compress(const Plane& image, std::size_t n);

/// Zero-filled spectrum with conjugate partners restored.
Spectrum expand_spectrum(const SparseSpectrum& code);
Plane fft_decompress(const SparseSpectrum& code);

/// Orthonormal multilevel Haar (db1) coefficients in Mallat layout. The
/// transformed plane covers the input padded by edge replication to a
/// multiple of 2^levels in both directions.
struct HaarPlane {
    int width = 0;   ///< original width
    int height = 0;  ///< original height
    int levels = 0;
    Plane coeffs;    ///< padded size
};

/// floor(log2(min(width, height))), at least 1.
int max_haar_levels(int width, int height);

/// Edge-replicated copy of `image` sized to multiples of 2^levels.
Plane pad_for_haar(const Plane& image, int levels);

/// Throws std::invalid_argument for levels < 1.
HaarPlane haar2_forward(const Plane& image, int levels);
/// Full padded reconstruction.
Plane haar2_inverse_padded(const HaarPlane& coeffs);
/// Reconstruction cropped to the original size.
Plane haar2_inverse(const HaarPlane& coeffs);

struct SparseWavelet {
    int width = 0;
    int height = 0;
    int padded_width = 0;
    int padded_height = 0;
    int levels = 0;
    std::vector<std::pair<std::uint32_t, double>> entries;

    friend bool operator==(const SparseWavelet&, const SparseWavelet&) = default;
};

/// Top-n coefficients by magnitude (ties: lower flat index first) of the
/// maximum-depth decomposition. n >= 1; n past the coefficient count is
/// lossless.
SparseWavelet wavelet_compress(const Plane& image, std::size_t n);
HaarPlane expand_wavelet(const SparseWavelet& code);
Plane wavelet_decompress(const SparseWavelet& code);

/// Little-endian binary: magic "CSFT"/"CSHW", u32 version, dimensions,
/// u32 entry count, then (u32 index, f64 value[s]) pairs.
void save_sparse(const std::filesystem::path& path, const SparseSpectrum& code);
void save_sparse(const std::filesystem::path& path, const SparseWavelet& code);
SparseSpectrum load_sparse_spectrum(const std::filesystem::path& path);
SparseWavelet load_sparse_wavelet(const std::filesystem::path& path);

}  // namespace collenc
