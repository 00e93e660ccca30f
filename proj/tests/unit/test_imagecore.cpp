#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "collenc/image.hpp"
#include "collenc/image_io.hpp"
#include "test_support.hpp"

using namespace collenc;
using collenc::testing::TempDir;

namespace {

CameraIntrinsics k100() { return {100.0, 100.0, 40.0, 30.0, 200, 200}; }

}  // namespace

TEST(Intrinsics, ValidateRejectsBadValues) {
    EXPECT_NO_THROW(k100().validate());
    EXPECT_THROW((CameraIntrinsics{0.0, 1.0, 0.0, 0.0, 4, 4}.validate()), std::invalid_argument);
    EXPECT_THROW((CameraIntrinsics{1.0, 1.0, 4.0, 0.0, 4, 4}.validate()), std::invalid_argument);
    EXPECT_THROW((CameraIntrinsics{1.0, 1.0, 0.0, -1.0, 4, 4}.validate()), std::invalid_argument);
}

TEST(Intrinsics, DeskDefault) {
    const auto K = CameraIntrinsics::desk_default(80, 60);
    EXPECT_EQ(K.fx, 40.0);
    EXPECT_EQ(K.fy, 40.0);
    EXPECT_EQ(K.cx, 39.5);
    EXPECT_EQ(K.cy, 29.5);
    EXPECT_EQ(K.pixel_count(), 4800u);
}

TEST(PixelToPoint, OpticalCenterRay) {
    CameraIntrinsics K{100.0, 100.0, 40.0, 30.0, 200, 200};
    const Point3 p = pixel_to_point(40, 30, 2.0, K);
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.y, 0.0);
    EXPECT_EQ(p.z, 2.0);
}

TEST(PixelToPoint, HandEvaluatedExamples) {
    const auto K = k100();
    const Point3 a = pixel_to_point(140, 30, 1.0, K);
    EXPECT_DOUBLE_EQ(a.x, -1.0);
    EXPECT_DOUBLE_EQ(a.y, 0.0);
    EXPECT_DOUBLE_EQ(a.z, 1.0);
    const Point3 b = pixel_to_point(40, 130, 2.0, K);
    EXPECT_DOUBLE_EQ(b.x, 0.0);
    EXPECT_DOUBLE_EQ(b.y, -2.0);
    EXPECT_DOUBLE_EQ(b.z, 2.0);
}

TEST(PixelToPoint, RejectsNonPositiveDepth) {
    EXPECT_THROW(pixel_to_point(0, 0, 0.0, k100()), std::invalid_argument);
    EXPECT_THROW(pixel_to_point(0, 0, -1.0, k100()), std::invalid_argument);
}

TEST(PixelToPoint, ZEqualsDepthExactly) {
    const auto K = CameraIntrinsics::desk_default(80, 60);
    CounterRng rng(1);
    for (int i = 0; i < 100; ++i) {
        const double z = rng.uniform(0.1, 10.0);
        EXPECT_EQ(pixel_to_point(static_cast<int>(rng.uniform_int(0, 79)), 3, z, K).z, z);
    }
}

TEST(DepthRange, CenterPixelUnchanged) {
    const CameraIntrinsics K{100.0, 100.0, 1.0, 1.0, 3, 3};
    DepthImage d(3, 3);
    d.at(1, 1) = 5.0;
    EXPECT_EQ(depth_to_range(d, K).at(1, 1), 5.0);
    RangeImage r(3, 3);
    r.at(1, 1) = 5.0;
    EXPECT_EQ(range_to_depth(r, K).at(1, 1), 5.0);
}

TEST(DepthRange, ThreeFourFiveTriangle) {
    // (cx - u) / fx = 0.75 at u = 0.
    const CameraIntrinsics K{4.0, 4.0, 3.0, 0.0, 4, 1};
    DepthImage d(4, 1);
    d.at(0, 0) = 4.0;
    const RangeImage r = depth_to_range(d, K);
    EXPECT_NEAR(r.at(0, 0), 5.0, 1e-12);
    RangeImage r2(4, 1);
    r2.at(0, 0) = 5.0;
    EXPECT_NEAR(range_to_depth(r2, K).at(0, 0), 4.0, 1e-12);
}

TEST(DepthRange, InvalidStaysInvalid) {
    const auto K = CameraIntrinsics::desk_default(8, 6);
    DepthImage d(8, 6);
    EXPECT_EQ(depth_to_range(d, K).values()[17], kInvalid);
}

TEST(DepthRange, InverseAndRangeDominatesDepth) {
    const auto K = CameraIntrinsics::desk_default(80, 60);
    const DepthImage d = collenc::testing::random_depth(80, 60, 3);
    const RangeImage r = depth_to_range(d, K);
    const DepthImage back = range_to_depth(r, K);
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_NEAR(back[i], d[i], 1e-9 * d[i]);
        EXPECT_GE(r[i], d[i]);
    }
}

TEST(DepthRange, DimensionMismatchThrows) {
    EXPECT_THROW(depth_to_range(DepthImage(4, 4), CameraIntrinsics::desk_default(8, 6)), std::invalid_argument);
    EXPECT_THROW(range_to_depth(RangeImage(4, 4), CameraIntrinsics::desk_default(8, 6)), std::invalid_argument);
}

TEST(MaskedMse, Examples) {
    const std::vector<double> a{2, 4}, b{2, 1};
    const std::vector<std::uint8_t> first{1, 0}, all{1, 1};
    EXPECT_EQ(masked_mse(a, b, first).value, 0.0);
    EXPECT_EQ(masked_mse(a, b, all).value, 4.5);
    EXPECT_EQ(masked_mse(a, a, all).value, 0.0);
    EXPECT_EQ(masked_mse(a, b, all).covered, 2u);
}

TEST(MaskedMse, EmptyMaskFlagsZeroCoverage) {
    const std::vector<double> a{2, 4}, b{2, 1};
    const std::vector<std::uint8_t> none{0, 0};
    const MseResult r = masked_mse(a, b, none);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_TRUE(r.empty_coverage());
}

TEST(MaskedMse, SymmetricAndMismatchThrows) {
    const DepthImage a = collenc::testing::random_depth(10, 10, 1), b = collenc::testing::random_depth(10, 10, 2);
    const auto mask = validity_mask(a);
    EXPECT_EQ(masked_mse(a, b, mask).value, masked_mse(b, a, mask).value);
    const std::vector<double> x{1, 2, 3}, y{1, 2};
    const std::vector<std::uint8_t> m{1, 1, 1};
    EXPECT_THROW(masked_mse(x, y, m), std::invalid_argument);
}

TEST(Pfm, RoundTripIsBitExact) {
    TempDir dir("pfm");
    const DepthImage d = collenc::testing::random_depth(13, 7, 5);
    save_image(dir / "a.pfm", d);
    EXPECT_EQ(load_image<DepthTag>(dir / "a.pfm"), d);
}

TEST(Pfm, HeaderAndRowOrder) {
    TempDir dir("pfm");
    DepthImage d(2, 2);
    d.at(0, 0) = 1.0;  // top-left
    save_image(dir / "a.pfm", d);
    std::ifstream in(dir / "a.pfm", std::ios::binary);
    std::string header(12, '\0');
    in.read(header.data(), 12);
    EXPECT_EQ(header, "Pf\n2 2\n-1.0\n");
    // Bottom row first: the top-left pixel is the third float.
    in.seekg(12 + 8);
    float v = 0.0f;
    in.read(reinterpret_cast<char*>(&v), 4);
    EXPECT_EQ(v, 1.0f);
}

TEST(Pfm, TruncatedFileThrows) {
    TempDir dir("pfm");
    save_image(dir / "a.pfm", collenc::testing::random_depth(8, 8, 1));
    std::filesystem::resize_file(dir / "a.pfm", std::filesystem::file_size(dir / "a.pfm") - 3);
    EXPECT_THROW(load_pfm(dir / "a.pfm"), IoError);
}

TEST(Pfm, MalformedAndColourRejected) {
    TempDir dir("pfm");
    std::ofstream(dir / "bad.pfm") << "P5\n2 2\n255\n";
    EXPECT_THROW(load_pfm(dir / "bad.pfm"), IoError);
    std::ofstream(dir / "colour.pfm") << "PF\n1 1\n-1.0\n";
    EXPECT_THROW(load_pfm(dir / "colour.pfm"), IoError);
    std::ofstream(dir / "hdr.pfm") << "Pf\nx y\n-1.0\n";
    EXPECT_THROW(load_pfm(dir / "hdr.pfm"), IoError);
    EXPECT_THROW(load_pfm(dir / "missing.pfm"), IoError);
}

TEST(Pfm, BigEndianAccepted) {
    TempDir dir("pfm");
    std::ofstream out(dir / "be.pfm", std::ios::binary);
    out << "Pf\n1 1\n1.0\n";
    const unsigned char be_two[4] = {0x40, 0x00, 0x00, 0x00};  // 2.0f big-endian
    out.write(reinterpret_cast<const char*>(be_two), 4);
    out.close();
    EXPECT_EQ(load_pfm(dir / "be.pfm").values.at(0), 2.0);
}

TEST(Preview, RoundHalfUp) {
    EXPECT_EQ(quantize_preview(5.0, 10.0), 128);
    EXPECT_EQ(quantize_preview(0.0, 10.0), 0);
    EXPECT_EQ(quantize_preview(10.0, 10.0), 255);
    EXPECT_EQ(quantize_preview(20.0, 10.0), 255);
    std::vector<double> constant(12, 5.0);
    for (auto p : to_preview(constant, 10.0)) EXPECT_EQ(p, 128);
}

TEST(Preview, PgmLayout) {
    TempDir dir("pgm");
    DepthImage d(3, 2);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 5.0;
    save_preview(dir / "p.pgm", d);
    std::ifstream in(dir / "p.pgm", std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    in.get();
    EXPECT_EQ(magic, "P5");
    EXPECT_EQ(w, 3);
    EXPECT_EQ(h, 2);
    EXPECT_EQ(maxval, 255);
    std::string px(6, '\0');
    in.read(px.data(), 6);
    for (char c : px) EXPECT_EQ(static_cast<unsigned char>(c), 128);
}
