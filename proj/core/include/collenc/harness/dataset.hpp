#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "collenc/collision.hpp"
#include "collenc/image.hpp"
#include "collenc/scene.hpp"

namespace collenc::harness {

struct DatasetConfig {
    std::size_t train_count = 512;
    std::size_t test_count = 128;
    std::uint64_t seed = 1;
    int width = 80;
    int height = 60;
    SceneConfig scene{};
    /// Ground-truth collision parameters; edge_fraction is forced to 1.
    CollisionParams collision = CollisionParams::for_robot(0.25);
    unsigned threads = 1;

    void validate() const;
    [[nodiscard]] CameraIntrinsics intrinsics() const;
    /// Canonical JSON of every field that affects the generated files.
    [[nodiscard]] std::string to_json() const;
};

/// Top-level keys: train, test, seed, width, height, robot_r,
/// edge_threshold, threads; an optional "scene" object feeds SceneConfig.
DatasetConfig dataset_config_from_json(const std::string& text);

struct DatasetEntry {
    std::uint64_t scene_seed = 0;
    std::string depth_path;      ///< relative to the manifest directory
    std::string collision_path;  ///< relative to the manifest directory
    std::string split;           ///< "train" or "test"

    friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct DatasetManifest {
    std::vector<DatasetEntry> entries;
    CameraIntrinsics intrinsics{};
    RobotSpec robot{};
    CollisionParams collision{};
    double max_range = kDefaultMaxRange;
    std::string config_hash;  ///< FNV-1a of DatasetConfig::to_json, hex
    std::filesystem::path root;

    [[nodiscard]] std::string to_json() const;
    void save(const std::filesystem::path& path) const;
    static DatasetManifest load(const std::filesystem::path& path);
};

inline constexpr const char* kManifestName = "manifest.json";

std::uint64_t fnv1a(std::string_view bytes);
/// Scene seed of dataset image `index`.
std::uint64_t scene_seed(std::uint64_t dataset_seed, std::size_t index);

/// Renders one scene and its collision image at the configured resolution.
struct ScenePair {
    DepthImage depth;
    CollisionImage collision;
};
ScenePair render_pair(const DatasetConfig& config, std::uint64_t seed);

/// Number of valid pixels breaking D_coll <= D_offset <= D.
std::size_t collision_invariant_violations(const DepthImage& depth, const CollisionImage& coll,
                                           const CameraIntrinsics& K, double r);

/// Writes depth/NNNNN.pfm, collision/NNNNN.pfm and manifest.json under
/// `out_dir`. The first train_count images form the train split. Output is
/// identical for any thread count. Throws std::logic_error when a pair
/// fails the collision invariants.
DatasetManifest build_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir);

struct LoadedPair {
    std::uint64_t scene_seed = 0;
    DepthImage depth;
    CollisionImage collision;
};

/// Loads every entry of the named split, in manifest order.
std::vector<LoadedPair> load_split(const DatasetManifest& manifest, std::string_view split);

}  // namespace collenc::harness
