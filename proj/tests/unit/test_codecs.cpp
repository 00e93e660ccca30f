#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "collenc/codecs.hpp"
#include "collenc/image_io.hpp"
#include "test_support.hpp"

using namespace collenc;

namespace {

Plane random_plane(int w, int h, std::uint64_t seed) {
    CounterRng rng(seed);
    Plane p(w, h);
    for (double& v : p.values) v = rng.uniform(-1.0, 1.0);
    return p;
}

double mse(const Plane& a, const Plane& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    return s / static_cast<double>(a.size());
}

double max_abs_diff(const Plane& a, const Plane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

// Direct O(N^2) DFT with the unnormalized forward convention.
std::vector<Complex> naive_dft(const Plane& p) {
    std::vector<Complex> out(p.size());
    for (int ky = 0; ky < p.height; ++ky)
        for (int kx = 0; kx < p.width; ++kx) {
            Complex acc = 0.0;
            for (int y = 0; y < p.height; ++y)
                for (int x = 0; x < p.width; ++x) {
                    const double ang = -2.0 * std::numbers::pi *
                                       (static_cast<double>(kx * x) / p.width + static_cast<double>(ky * y) / p.height);
                    acc += p.at(x, y) * Complex(std::cos(ang), std::sin(ang));
                }
            out[static_cast<std::size_t>(ky) * p.width + kx] = acc;
        }
    return out;
}

}  // namespace

TEST(Fft, ConstantImageIsDcOnly) {
    Plane p(6, 4);
    std::fill(p.values.begin(), p.values.end(), 2.5);
    const Spectrum s = fft2_forward(p);
    EXPECT_NEAR(s.bins[0].real(), 2.5 * 24, 1e-12);
    for (std::size_t i = 1; i < s.bins.size(); ++i) EXPECT_LT(std::abs(s.bins[i]), 1e-12);
}

TEST(Fft, MatchesNaiveDft) {
    const Plane p = random_plane(7, 5, 3);
    const Spectrum s = fft2_forward(p);
    const auto ref = naive_dft(p);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_LT(std::abs(s.bins[i] - ref[i]), 1e-10);
}

TEST(Fft, RoundTripAndHermitian) {
    const Plane p = random_plane(16, 12, 5);
    const Spectrum s = fft2_forward(p);
    for (std::size_t i = 0; i < s.bins.size(); ++i)
        EXPECT_LT(std::abs(s.bins[i] - std::conj(s.bins[conjugate_bin(i, 16, 12)])), 1e-10);
    const auto back = fft2_inverse(s);
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_LT(std::abs(back[i].real() - p.values[i]), 1e-9);
        EXPECT_LT(std::abs(back[i].imag()), 1e-9);
    }
}

TEST(Fft, CosineRowHasTwoConjugateBins) {
    const int w = 16, h = 4;
    Plane p(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) p.at(x, y) = std::cos(2 * std::numbers::pi * x / w);
    const Spectrum s = fft2_forward(p);
    int nonzero = 0;
    for (std::size_t i = 0; i < s.bins.size(); ++i)
        if (std::abs(s.bins[i]) > 1e-9) ++nonzero;
    EXPECT_EQ(nonzero, 2);
    EXPECT_NEAR(s.bins[1].real(), w * h / 2.0, 1e-9);
    EXPECT_NEAR(s.bins[w - 1].real(), w * h / 2.0, 1e-9);
}

TEST(FftCompress, BudgetValidation) {
    const Plane p = random_plane(8, 8, 1);
    EXPECT_THROW(fft_compress(p, 0), std::invalid_argument);
    EXPECT_THROW(fft_compress(p, 3), std::invalid_argument);
    EXPECT_LE(fft_compress(p, 10).entries.size(), 5u);
}

TEST(FftCompress, ConstantImageWithTwoValuesIsExact) {
    Plane p(8, 6);
    std::fill(p.values.begin(), p.values.end(), 4.0);
    const SparseSpectrum code = fft_compress(p, 2);
    EXPECT_EQ(code.entries.size(), 1u);
    EXPECT_LT(max_abs_diff(fft_decompress(code), p), 1e-12);
}

TEST(FftCompress, FullBudgetIsExact) {
    for (auto [w, h] : {std::pair{8, 8}, std::pair{7, 5}, std::pair{80, 60}}) {
        const Plane p = random_plane(w, h, 7);
        const Plane back = fft_decompress(fft_compress(p, 2 * p.size()));
        EXPECT_LT(mse(p, back), 1e-20);
    }
}

TEST(FftCompress, TwoCosinesKeepsLargerOne) {
    const int w = 16, h = 8;
    Plane p(w, h), big(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            big.at(x, y) = 3 * std::cos(2 * std::numbers::pi * x / w);
            p.at(x, y) = big.at(x, y) + std::cos(2 * std::numbers::pi * 3 * y / h);
        }
    const Plane back = fft_decompress(fft_compress(p, 2));
    EXPECT_LT(max_abs_diff(back, big), 1e-9);
    EXPECT_NEAR(mse(p, back), 0.5, 1e-12);
}

TEST(FftCompress, TiesBreakByAscendingIndex) {
    // A unit impulse has a flat spectrum: every bin ties at magnitude 2.
    const Plane p(4, 1, {2, 0, 0, 0});
    const SparseSpectrum two = fft_compress(p, 2);
    ASSERT_EQ(two.entries.size(), 1u);
    EXPECT_EQ(two.entries[0].first, 0u);
    const SparseSpectrum four = fft_compress(p, 4);
    ASSERT_EQ(four.entries.size(), 2u);
    EXPECT_EQ(four.entries[1].first, 1u);
}

TEST(FftCompress, EmptyCodeDecodesToZero) {
    const SparseSpectrum code{4, 3, 2, {}};
    for (double v : fft_decompress(code).values) EXPECT_EQ(v, 0.0);
}

TEST(FftCompress, BudgetMonotone) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Plane p = random_plane(20, 15, seed);
        double prev = INFINITY;
        for (std::size_t n = 2; n <= 400; n += 2) {
            const double e = mse(p, fft_decompress(fft_compress(p, n)));
            EXPECT_LE(e, prev + 1e-15);
            prev = e;
        }
    }
}

TEST(Haar, ConstantTwoByTwo) {
    Plane p(2, 2);
    std::fill(p.values.begin(), p.values.end(), 3.0);
    const HaarPlane h = haar2_forward(p, 1);
    EXPECT_NEAR(h.coeffs.values[0], 6.0, 1e-15);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(h.coeffs.values[i], 0.0, 1e-15);
}

TEST(Haar, IdentityMatrixCoefficients) {
    const Plane p(2, 2, {1, 0, 0, 1});
    const HaarPlane h = haar2_forward(p, 1);
    // Layout [[LL, HL], [LH, HH]]: LL = 1, details 0 except HH = 1.
    EXPECT_NEAR(h.coeffs.at(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(h.coeffs.at(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(h.coeffs.at(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(h.coeffs.at(1, 1), 1.0, 1e-15);
}

TEST(Haar, RoundTripAndParseval) {
    const Plane p = random_plane(8, 8, 9);
    const HaarPlane h = haar2_forward(p, 3);
    EXPECT_LT(max_abs_diff(haar2_inverse(h), p), 1e-9);
    double e_img = 0.0, e_coef = 0.0;
    for (double v : p.values) e_img += v * v;
    for (double v : h.coeffs.values) e_coef += v * v;
    EXPECT_NEAR(e_img, e_coef, 1e-9);
}

TEST(Haar, PaddingByEdgeReplication) {
    EXPECT_EQ(max_haar_levels(80, 60), 5);
    EXPECT_EQ(max_haar_levels(1, 7), 1);
    const Plane p = random_plane(5, 3, 2);
    const Plane padded = pad_for_haar(p, 2);
    EXPECT_EQ(padded.width, 8);
    EXPECT_EQ(padded.height, 4);
    EXPECT_EQ(padded.at(7, 3), p.at(4, 2));
    EXPECT_EQ(padded.at(2, 3), p.at(2, 2));
    const HaarPlane h = haar2_forward(p, 2);
    EXPECT_LT(max_abs_diff(haar2_inverse(h), p), 1e-12);
    EXPECT_THROW(haar2_forward(p, 0), std::invalid_argument);
}

TEST(WaveletCompress, ConstantImageOneCoefficient) {
    // Square, so the decomposition runs down to a single approximation coefficient.
    Plane p(16, 16);
    std::fill(p.values.begin(), p.values.end(), 1.5);
    EXPECT_LT(max_abs_diff(wavelet_decompress(wavelet_compress(p, 1)), p), 1e-12);
    // 16 x 8 stops at a 2 x 1 approximation band.
    Plane q(16, 8);
    std::fill(q.values.begin(), q.values.end(), 1.5);
    EXPECT_GT(max_abs_diff(wavelet_decompress(wavelet_compress(q, 1)), q), 1.0);
    EXPECT_LT(max_abs_diff(wavelet_decompress(wavelet_compress(q, 2)), q), 1e-12);
}

TEST(WaveletCompress, IdentityMatrixTwoCoefficients) {
    const Plane p(2, 2, {1, 0, 0, 1});
    EXPECT_LT(max_abs_diff(wavelet_decompress(wavelet_compress(p, 2)), p), 1e-15);
}

TEST(WaveletCompress, FullBudgetExactAndBudgetValidation) {
    const Plane p = random_plane(80, 60, 4);
    EXPECT_LT(mse(p, wavelet_decompress(wavelet_compress(p, 1u << 20))), 1e-20);
    EXPECT_THROW(wavelet_compress(p, 0), std::invalid_argument);
}

TEST(WaveletCompress, MseEqualsDiscardedEnergy) {
    const Plane p = random_plane(32, 16, 6);
    const HaarPlane full = haar2_forward(p, max_haar_levels(32, 16));
    for (std::size_t n : {1u, 7u, 32u, 100u, 400u}) {
        const SparseWavelet code = wavelet_compress(p, n);
        double kept = 0.0, total = 0.0;
        for (const auto& [i, v] : code.entries) kept += v * v;
        for (double v : full.coeffs.values) total += v * v;
        EXPECT_NEAR(mse(p, wavelet_decompress(code)), (total - kept) / p.size(), 1e-9);
    }
}

TEST(WaveletCompress, BudgetMonotoneOnPowerOfTwoImages) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Plane p = random_plane(16, 16, seed);
        double prev = INFINITY;
        for (std::size_t n = 1; n <= 256; ++n) {
            const double e = mse(p, wavelet_decompress(wavelet_compress(p, n)));
            EXPECT_LE(e, prev + 1e-15);
            prev = e;
        }
    }
}

TEST(SparseIo, RoundTripBothFormats) {
    collenc::testing::TempDir dir("sparse");
    const Plane p = random_plane(12, 10, 8);
    const SparseSpectrum s = fft_compress(p, 16);
    save_sparse(dir / "a.csft", s);
    EXPECT_EQ(load_sparse_spectrum(dir / "a.csft"), s);
    const SparseWavelet w = wavelet_compress(p, 9);
    save_sparse(dir / "a.cshw", w);
    EXPECT_EQ(load_sparse_wavelet(dir / "a.cshw"), w);
    EXPECT_THROW(load_sparse_wavelet(dir / "a.csft"), IoError);
    std::filesystem::resize_file(dir / "a.cshw", 30);
    EXPECT_THROW(load_sparse_wavelet(dir / "a.cshw"), IoError);
}
