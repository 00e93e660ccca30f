#include "collenc/harness/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "collenc/image_io.hpp"
#include "collenc/parallel.hpp"
#include "collenc/render.hpp"
#include "collenc/rng.hpp"

namespace collenc::harness {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string image_name(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05zu.pfm", index);
    return buf;
}

json intrinsics_json(const CameraIntrinsics& K) {
    return {{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy}, {"width", K.width}, {"height", K.height}};
}

json collision_json(const CollisionParams& p) {
    return {{"r", p.r}, {"edge_threshold", p.edge_threshold}, {"edge_fraction", p.edge_fraction}, {"seed", p.seed}};
}

}  // namespace

void DatasetConfig::validate() const {
    if (train_count + test_count == 0) throw std::invalid_argument("dataset config: count must be >= 1");
    if (width < 1 || height < 1) throw std::invalid_argument("dataset config: bad resolution");
    scene.validate();
    collision.validate();
}

CameraIntrinsics DatasetConfig::intrinsics() const { return CameraIntrinsics::desk_default(width, height); }

std::string DatasetConfig::to_json() const {
    const json j{{"train", train_count},
                 {"test", test_count},
                 {"seed", seed},
                 {"width", width},
                 {"height", height},
                 {"collision", collision_json(collision)},
                 {"scene", json::parse(scene_config_to_json(scene))}};
    return j.dump();
}

DatasetConfig dataset_config_from_json(const std::string& text) {
    DatasetConfig c;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("dataset config: ") + e.what());
    }
    try {
        if (j.contains("train")) c.train_count = j.at("train").get<std::size_t>();
        if (j.contains("test")) c.test_count = j.at("test").get<std::size_t>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("width")) c.width = j.at("width").get<int>();
        if (j.contains("height")) c.height = j.at("height").get<int>();
        if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
        if (j.contains("robot_r")) c.collision = CollisionParams::for_robot(j.at("robot_r").get<double>());
        if (j.contains("edge_threshold")) c.collision.edge_threshold = j.at("edge_threshold").get<double>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("dataset config: ") + e.what());
    }
    if (j.contains("scene")) c.scene = scene_config_from_json(text);
    c.validate();
    return c;
}

std::string DatasetManifest::to_json() const {
    json entries_json = json::array();
    for (const auto& e : entries)
        entries_json.push_back(
            {{"scene_seed", e.scene_seed}, {"depth", e.depth_path}, {"collision", e.collision_path}, {"split", e.split}});
    const json j{{"config_hash", config_hash},
                 {"max_range", max_range},
                 {"intrinsics", intrinsics_json(intrinsics)},
                 {"robot", {{"r", robot.r}}},
                 {"collision", collision_json(collision)},
                 {"entries", entries_json}};
    return j.dump(2) + "\n";
}

void DatasetManifest::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << to_json();
    if (!out) throw IoError("write failed: " + path.string());
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    DatasetManifest m;
    try {
        const json j = json::parse(ss.str());
        m.config_hash = j.at("config_hash").get<std::string>();
        m.max_range = j.at("max_range").get<double>();
        const auto& k = j.at("intrinsics");
        m.intrinsics = {k.at("fx").get<double>(),  k.at("fy").get<double>(),   k.at("cx").get<double>(),
                        k.at("cy").get<double>(),  k.at("width").get<int>(), k.at("height").get<int>()};
        m.robot.r = j.at("robot").at("r").get<double>();
        const auto& c = j.at("collision");
        m.collision = {c.at("r").get<double>(), c.at("edge_threshold").get<double>(),
                       c.at("edge_fraction").get<double>(), c.at("seed").get<std::uint64_t>()};
        for (const auto& e : j.at("entries"))
            m.entries.push_back({e.at("scene_seed").get<std::uint64_t>(), e.at("depth").get<std::string>(),
                                 e.at("collision").get<std::string>(), e.at("split").get<std::string>()});
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": malformed manifest: " + e.what());
    }
    m.intrinsics.validate();
    m.root = path.parent_path();
    return m;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t scene_seed(std::uint64_t dataset_seed, std::size_t index) { return derive_key(dataset_seed, index); }

ScenePair render_pair(const DatasetConfig& config, std::uint64_t seed) {
    SceneConfig sc = config.scene;
    sc.seed = seed;
    const CameraIntrinsics K = config.intrinsics();
    ScenePair p;
    p.depth = raycast_depth(generate_scene(sc), K, sc.max_range);
    CollisionParams cp = config.collision;
    cp.edge_fraction = 1.0;
    p.collision = collision_image(p.depth, K, cp);
    return p;
}

std::size_t collision_invariant_violations(const DepthImage& depth, const CollisionImage& coll,
                                           const CameraIntrinsics& K, double r) {
    const DepthImage offset = offset_image(depth, K, r);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < depth.size(); ++i) {
        if (depth[i] == kInvalid) continue;
        if (coll[i] == kInvalid || coll[i] > offset[i] || offset[i] > depth[i]) ++bad;
    }
    return bad;
}

DatasetManifest build_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir) {
    config.validate();
    const std::size_t total = config.train_count + config.test_count;
    std::filesystem::create_directories(out_dir / "depth");
    std::filesystem::create_directories(out_dir / "collision");

    DatasetManifest m;
    m.intrinsics = config.intrinsics();
    m.robot.r = config.collision.r;
    m.collision = config.collision;
    m.collision.edge_fraction = 1.0;
    m.max_range = config.scene.max_range;
    m.config_hash = hex64(fnv1a(config.to_json()));
    m.root = out_dir;
    m.entries.resize(total);

    parallel_for(total, config.threads, [&](std::size_t i) {
        const std::uint64_t seed = scene_seed(config.seed, i);
        const ScenePair p = render_pair(config, seed);
        if (const auto bad = collision_invariant_violations(p.depth, p.collision, m.intrinsics, m.robot.r))
            throw std::logic_error("scene " + std::to_string(seed) + ": " + std::to_string(bad) +
                                   " pixels break the collision invariants");
        DatasetEntry& e = m.entries[i];
        e.scene_seed = seed;
        e.depth_path = "depth/" + image_name(i);
        e.collision_path = "collision/" + image_name(i);
        e.split = i < config.train_count ? "train" : "test";
        save_image(out_dir / e.depth_path, p.depth);
        save_image(out_dir / e.collision_path, p.collision);
    });
    m.save(out_dir / kManifestName);
    return m;
}

std::vector<LoadedPair> load_split(const DatasetManifest& manifest, std::string_view split) {
    std::vector<LoadedPair> out;
    for (const auto& e : manifest.entries) {
        if (e.split != split) continue;
        LoadedPair p;
        p.scene_seed = e.scene_seed;
        p.depth = load_image<DepthTag>(manifest.root / e.depth_path, manifest.max_range);
        p.collision = load_image<DepthTag>(manifest.root / e.collision_path, manifest.max_range);
        if (!p.depth.same_shape(manifest.intrinsics.width, manifest.intrinsics.height) ||
            !p.collision.same_shape(manifest.intrinsics.width, manifest.intrinsics.height))
            throw IoError(e.depth_path + ": image size does not match manifest intrinsics");
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace collenc::harness
