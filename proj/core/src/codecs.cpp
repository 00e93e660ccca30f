#include "collenc/codecs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include <fftw3.h>

namespace collenc {

Plane::Plane(int w, int h, std::vector<double> v) : width(w), height(h), values(std::move(v)) {
    if (w < 0 || h < 0 || values.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h))
        throw std::invalid_argument("plane data length does not match dimensions");
}

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

// Buffers come from fftw_malloc so the planner sees identical alignment on
// every call and picks the same codelets.
std::vector<Complex> dft2(const std::vector<Complex>& in, int width, int height, int sign) {
    std::vector<Complex> out(in.size());
    if (in.empty()) return out;
    FftwBuffer src(in.size()), dst(in.size());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_2d(height, width, src.data, dst.data, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fftw: planning failed");
    for (std::size_t i = 0; i < in.size(); ++i) {
        src.data[i][0] = in[i].real();
        src.data[i][1] = in[i].imag();
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {dst.data[i][0], dst.data[i][1]};
    return out;
}

template <class Value>
void sort_by_magnitude(std::vector<std::pair<std::uint32_t, Value>>& items) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a.second), mb = std::abs(b.second);
        if (ma != mb) return ma > mb;
        return a.first < b.first;
    });
}

}  // namespace

Spectrum fft2_forward(const Plane& image) {
    if (image.width < 1 || image.height < 1) throw std::invalid_argument("fft2: empty image");
    std::vector<Complex> in(image.values.begin(), image.values.end());
    return {image.width, image.height, dft2(in, image.width, image.height, FFTW_FORWARD)};
}

std::vector<Complex> fft2_inverse(const Spectrum& spectrum) {
    std::vector<Complex> out = dft2(spectrum.bins, spectrum.width, spectrum.height, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(out.size());
    for (Complex& c : out) c *= scale;
    return out;
}

std::size_t conjugate_bin(std::size_t index, int width, int height) {
    const auto w = static_cast<std::size_t>(width), h = static_cast<std::size_t>(height);
    const std::size_t ky = index / w, kx = index % w;
    return ((h - ky) % h) * w + (w - kx) % w;
}

SparseSpectrum fft_compress(const Plane& image, std::size_t n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("fft_compress: budget must be even and >= 2");
    const Spectrum spec = fft2_forward(image);
    std::vector<std::pair<std::uint32_t, Complex>> unique;
    for (std::size_t i = 0; i < spec.bins.size(); ++i)
        if (i <= conjugate_bin(i, spec.width, spec.height))
            unique.emplace_back(static_cast<std::uint32_t>(i), spec.bins[i]);
    sort_by_magnitude(unique);
    unique.resize(std::min(unique.size(), n / 2));
    return {spec.width, spec.height, n, std::move(unique)};
}

Spectrum expand_spectrum(const SparseSpectrum& code) {
    Spectrum s{code.width, code.height,
               std::vector<Complex>(static_cast<std::size_t>(code.width) * code.height)};
    for (const auto& [index, value] : code.entries) {
        s.bins.at(index) = value;
        const std::size_t partner = conjugate_bin(index, code.width, code.height);
        if (partner != index) s.bins[partner] = std::conj(value);
    }
    return s;
}

Plane fft_decompress(const SparseSpectrum& code) {
    const std::vector<Complex> full = fft2_inverse(expand_spectrum(code));
    Plane out(code.width, code.height);
    for (std::size_t i = 0; i < full.size(); ++i) out.values[i] = full[i].real();
    return out;
}

int max_haar_levels(int width, int height) {
    const int m = std::min(width, height);
    if (m < 1) throw std::invalid_argument("haar: empty image");
    return std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(m))) - 1);
}

Plane pad_for_haar(const Plane& image, int levels) {
    const int block = 1 << levels;
    const int pw = (image.width + block - 1) / block * block;
    const int ph = (image.height + block - 1) / block * block;
    Plane out(pw, ph);
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x)
            out.at(x, y) = image.at(std::min(x, image.width - 1), std::min(y, image.height - 1));
    return out;
}

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// One analysis step on the leading `n` entries of a strided line.
void haar_step(double* data, std::size_t stride, int n, std::vector<double>& tmp) {
    const int half = n / 2;
    tmp.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < half; ++i) {
        const double a = data[2 * i * stride], b = data[(2 * i + 1) * stride];
        tmp[i] = (a + b) * kInvSqrt2;
        tmp[half + i] = (a - b) * kInvSqrt2;
    }
    for (int i = 0; i < n; ++i) data[i * stride] = tmp[i];
}

void haar_unstep(double* data, std::size_t stride, int n, std::vector<double>& tmp) {
    const int half = n / 2;
    tmp.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < half; ++i) {
        const double s = data[i * stride], d = data[(half + i) * stride];
        tmp[2 * i] = (s + d) * kInvSqrt2;
        tmp[2 * i + 1] = (s - d) * kInvSqrt2;
    }
    for (int i = 0; i < n; ++i) data[i * stride] = tmp[i];
}

}  // namespace

HaarPlane haar2_forward(const Plane& image, int levels) {
    if (levels < 1) throw std::invalid_argument("haar2_forward: levels must be >= 1");
    if (image.width < 1 || image.height < 1) throw std::invalid_argument("haar2_forward: empty image");
    HaarPlane out{image.width, image.height, levels, pad_for_haar(image, levels)};
    Plane& p = out.coeffs;
    std::vector<double> tmp;
    int w = p.width, h = p.height;
    for (int l = 0; l < levels; ++l) {
        for (int y = 0; y < h; ++y) haar_step(&p.at(0, y), 1, w, tmp);
        for (int x = 0; x < w; ++x) haar_step(&p.at(x, 0), static_cast<std::size_t>(p.width), h, tmp);
        w /= 2;
        h /= 2;
    }
    return out;
}

Plane haar2_inverse_padded(const HaarPlane& coeffs) {
    Plane p = coeffs.coeffs;
    std::vector<double> tmp;
    for (int l = coeffs.levels - 1; l >= 0; --l) {
        const int w = p.width >> l, h = p.height >> l;
        for (int x = 0; x < w; ++x) haar_unstep(&p.at(x, 0), static_cast<std::size_t>(p.width), h, tmp);
        for (int y = 0; y < h; ++y) haar_unstep(&p.at(0, y), 1, w, tmp);
    }
    return p;
}

Plane haar2_inverse(const HaarPlane& coeffs) {
    const Plane full = haar2_inverse_padded(coeffs);
    Plane out(coeffs.width, coeffs.height);
    for (int y = 0; y < coeffs.height; ++y)
        for (int x = 0; x < coeffs.width; ++x) out.at(x, y) = full.at(x, y);
    return out;
}

SparseWavelet wavelet_compress(const Plane& image, std::size_t n) {
    if (n < 1) throw std::invalid_argument("wavelet_compress: budget must be >= 1");
    const HaarPlane hp = haar2_forward(image, max_haar_levels(image.width, image.height));
    std::vector<std::pair<std::uint32_t, double>> all;
    all.reserve(hp.coeffs.size());
    for (std::size_t i = 0; i < hp.coeffs.size(); ++i)
        all.emplace_back(static_cast<std::uint32_t>(i), hp.coeffs.values[i]);
    sort_by_magnitude(all);
    all.resize(std::min(all.size(), n));
    return {hp.width, hp.height, hp.coeffs.width, hp.coeffs.height, hp.levels, std::move(all)};
}

HaarPlane expand_wavelet(const SparseWavelet& code) {
    HaarPlane hp{code.width, code.height, code.levels, Plane(code.padded_width, code.padded_height)};
    for (const auto& [index, value] : code.entries) hp.coeffs.values.at(index) = value;
    return hp;
}

Plane wavelet_decompress(const SparseWavelet& code) { return haar2_inverse(expand_wavelet(code)); }

}  // namespace collenc
