#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "collenc/collision.hpp"
#include "collenc/harness/dataset.hpp"
#include "collenc/harness/evaluate.hpp"
#include "collenc/harness/report.hpp"
#include "collenc/image_io.hpp"
#include "test_support.hpp"

using namespace collenc;
using namespace collenc::harness;
namespace fs = std::filesystem;

namespace {

DatasetConfig small_dataset() {
    DatasetConfig c;
    c.train_count = 3;
    c.test_count = 2;
    c.width = 32;
    c.height = 24;
    c.seed = 17;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

nn::VaeConfig model_config(const DatasetConfig& d) {
    nn::VaeConfig c;
    c.height = d.height;
    c.width = d.width;
    c.encoder_channels = {4, 4};
    c.decoder_channels = {4};
    c.latent = 2;
    c.decoder_hidden = 8;
    return c;
}

}  // namespace

TEST(Dataset, RebuildIsByteIdenticalAcrossThreadCounts) {
    collenc::testing::TempDir a("ds_a"), b("ds_b");
    DatasetConfig c = small_dataset();
    const DatasetManifest ma = build_dataset(c, a.path());
    c.threads = 3;
    const DatasetManifest mb = build_dataset(c, b.path());
    ASSERT_EQ(ma.entries.size(), 5u);
    EXPECT_EQ(ma.entries, mb.entries);
    EXPECT_EQ(ma.config_hash, mb.config_hash);
    for (const auto& e : ma.entries) {
        EXPECT_EQ(slurp(a / e.depth_path), slurp(b / e.depth_path));
        EXPECT_EQ(slurp(a / e.collision_path), slurp(b / e.collision_path));
    }
    EXPECT_EQ(ma.entries[2].split, "train");
    EXPECT_EQ(ma.entries[3].split, "test");
}

TEST(Dataset, ManifestRoundTripAndInvariants) {
    collenc::testing::TempDir dir("ds");
    const DatasetConfig c = small_dataset();
    const DatasetManifest m = build_dataset(c, dir.path());
    const DatasetManifest loaded = DatasetManifest::load(dir / kManifestName);
    EXPECT_EQ(loaded.entries, m.entries);
    EXPECT_EQ(loaded.intrinsics, m.intrinsics);
    EXPECT_EQ(loaded.config_hash, m.config_hash);
    const auto train = load_split(loaded, "train");
    ASSERT_EQ(train.size(), 3u);
    // Files hold float32, so the offset bound is checked to float precision.
    for (const auto& p : train) {
        const DepthImage offset = offset_image(p.depth, loaded.intrinsics, c.collision.r);
        for (std::size_t i = 0; i < p.depth.size(); ++i) {
            if (p.depth[i] == kInvalid) continue;
            ASSERT_NE(p.collision[i], kInvalid);
            EXPECT_LE(p.collision[i], p.depth[i]);
            EXPECT_LE(p.collision[i], offset[i] + 1e-5);
        }
    }
    EXPECT_EQ(train[1].scene_seed, scene_seed(c.seed, 1));
}

TEST(Dataset, ConfigHashTracksContent) {
    DatasetConfig a = small_dataset(), b = small_dataset();
    b.seed = 18;
    EXPECT_NE(fnv1a(a.to_json()), fnv1a(b.to_json()));
    b = small_dataset();
    b.threads = 4;
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
}

TEST(Dataset, ConfigFromJson) {
    const DatasetConfig c = dataset_config_from_json(R"({"train": 10, "test": 4, "seed": 3, "robot_r": 0.4})");
    EXPECT_EQ(c.train_count, 10u);
    EXPECT_EQ(c.test_count, 4u);
    EXPECT_EQ(c.seed, 3u);
    EXPECT_DOUBLE_EQ(c.collision.r, 0.4);
    EXPECT_THROW(dataset_config_from_json(R"({"train": 0, "test": 0})"), std::invalid_argument);
}

TEST(Evaluate, CompressionRatios) {
    EXPECT_DOUBLE_EQ(compression_ratio(4800, 32), 150.0);
    EXPECT_DOUBLE_EQ(compression_ratio(270 * 480, 32), 4050.0);
    EXPECT_THROW(compression_ratio(10, 0), std::invalid_argument);
}

TEST(Evaluate, ModeNames) {
    EXPECT_EQ(parse_mode("collnet"), ModelMode::CollNet);
    EXPECT_EQ(to_string(ModelMode::Vanilla), "vanilla");
    EXPECT_THROW(parse_mode("other"), std::invalid_argument);
}

TEST(Evaluate, CsvIsStable) {
    MetricsTable t{"codecs", 4800, {}};
    t.rows.push_back({"fft", 32, 150.0, 0.5, std::nullopt, 2});
    t.rows.push_back({"collnet", 8, 600.0, std::nullopt, 0.001, 2});
    const std::string expected =
        "method,budget,compression_ratio,mse_depth,mse_depth_x255sq,mse_collision,mse_collision_x255sq,images\n"
        "fft,32,150,0.5,32512.5,,,2\n"
        "collnet,8,600,,,0.001,65.025,2\n";
    EXPECT_EQ(t.to_csv(), expected);
    EXPECT_EQ(t.to_csv(), t.to_csv());
    ASSERT_NE(t.find("fft", 32), nullptr);
    EXPECT_EQ(t.find("fft", 64), nullptr);
}

TEST(Evaluate, CodecRowsBehave) {
    collenc::testing::TempDir dir("ds");
    const DatasetConfig c = small_dataset();
    const DatasetManifest m = build_dataset(c, dir.path());
    const auto test = load_split(m, "test");
    const std::vector<std::size_t> budgets{32, 64, 1024};
    const MetricsTable t = evaluate_codecs(test, budgets, nullptr, m.max_range);
    ASSERT_EQ(t.rows.size(), 6u);
    EXPECT_LE(t.find("fft", 64)->mse_depth.value(), t.find("fft", 32)->mse_depth.value());
    EXPECT_LE(t.find("wavelet", 64)->mse_depth.value(), t.find("wavelet", 32)->mse_depth.value());
    // 32 x 24 pads to 32 x 32, so 1024 coefficients keep everything.
    EXPECT_LT(t.find("wavelet", 1024)->mse_depth.value(), 1e-9);
    EXPECT_DOUBLE_EQ(t.find("fft", 32)->compression_ratio, 24.0);
}

TEST(Evaluate, SamplesAndCollisionRows) {
    collenc::testing::TempDir dir("ds");
    const DatasetConfig c = small_dataset();
    const DatasetManifest m = build_dataset(c, dir.path());
    const auto test = load_split(m, "test");

    const auto vs = make_samples(test, ModelMode::Vanilla, m.max_range);
    const auto cs = make_samples(test, ModelMode::CollNet, m.max_range);
    ASSERT_EQ(vs.size(), 2u);
    EXPECT_EQ(vs[0].target, vs[0].input);
    EXPECT_EQ(cs[0].input, vs[0].input);
    EXPECT_NE(cs[0].target, cs[0].input);
    EXPECT_EQ(cs[0].mask, validity_mask(test[0].depth));

    ModelSet collnet, vanilla;
    collnet.emplace(2, nn::VaeModel::create(model_config(c), 1));
    vanilla.emplace(2, nn::VaeModel::create(model_config(c), 2));
    const MetricsTable t = evaluate_collision(test, collnet, vanilla, m.intrinsics, m.collision, m.max_range);
    ASSERT_NE(t.find("collnet", 2), nullptr);
    ASSERT_NE(t.find("vanilla_p", 2), nullptr);
    EXPECT_GT(t.find("collnet", 2)->mse_collision.value(), 0.0);
    EXPECT_DOUBLE_EQ(t.find("collnet", 2)->compression_ratio, 384.0);
}

TEST(Evaluate, DerivedCollisionOfExactInputIsGroundTruth) {
    const DatasetConfig c = small_dataset();
    const ScenePair pair = render_pair(c, 5);
    const CollisionImage p = derived_collision(pair.depth, c.intrinsics(), c.collision);
    EXPECT_EQ(p.values().size(), pair.collision.values().size());
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], pair.collision[i], 1e-12);
}

TEST(Report, IdenticalImagesGiveBlackErrorPanel) {
    const DepthImage d = collenc::testing::random_depth(8, 6, 3);
    double scale = -1;
    const auto panel = error_panel(d, d, scale);
    EXPECT_EQ(scale, 0.0);
    ASSERT_EQ(panel.size(), d.size());
    for (auto v : panel) EXPECT_EQ(v, 0);
}

TEST(Report, ErrorPanelScalesToMaximum) {
    DepthImage a(2, 1), b(2, 1);
    a[0] = 1.0;
    b[0] = 3.0;
    a[1] = 1.0;
    b[1] = 2.0;
    double scale = 0;
    const auto panel = error_panel(a, b, scale);
    EXPECT_DOUBLE_EQ(scale, 2.0);
    EXPECT_EQ(panel[0], 255);
    EXPECT_NEAR(panel[1], 128, 1);
}

TEST(Report, EmitsFiles) {
    collenc::testing::TempDir dir("rep");
    MetricsTable t{"codecs", 48, {{"fft", 4, 12.0, 0.1, std::nullopt, 1}}};
    const DepthImage d = collenc::testing::random_depth(8, 6, 3);
    std::vector<Panel> panels{{"sample", d, d}};
    const auto written = emit_report(std::span<const MetricsTable>(&t, 1), panels, dir.path());
    ASSERT_EQ(written.size(), 3u);
    for (const auto& p : written) EXPECT_TRUE(fs::exists(p)) << p;
    EXPECT_EQ(slurp(dir / "codecs.csv"), t.to_csv());
    const std::string pgm = slurp(dir / "sample.pgm");
    EXPECT_EQ(pgm.substr(0, 2), "P5");
}
