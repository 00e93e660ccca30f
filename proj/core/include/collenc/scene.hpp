#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "collenc/image.hpp"

namespace collenc {

struct Aabb {
    Point3 min;
    Point3 max;

    [[nodiscard]] bool contains(Point3 p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
               p.z <= max.z;
    }
    void expand(Point3 p);
    static Aabb empty();
    friend bool operator==(const Aabb&, const Aabb&) = default;
};

struct TriangleMesh {
    std::vector<Point3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;

    [[nodiscard]] bool empty() const { return triangles.empty(); }
    [[nodiscard]] Aabb bounds() const;
    [[nodiscard]] double surface_area() const;
    friend bool operator==(const TriangleMesh&, const TriangleMesh&) = default;
};

/// World geometry in the camera frame (z forward, x left, y up).
struct Scene {
    std::vector<Aabb> boxes;
    std::vector<TriangleMesh> meshes;

    [[nodiscard]] bool empty() const { return boxes.empty() && meshes.empty(); }
    friend bool operator==(const Scene&, const Scene&) = default;
};

/// Cubical robot with edge length 2r.
struct RobotSpec {
    double r = 0.25;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct CountRange {
    int lo = 0;
    int hi = 0;
    [[nodiscard]] bool enabled() const { return hi > 0; }
};

/// Knobs for the procedural generator. Defaults describe the desk-scale
/// dataset: a handful of obstacles of each class inside a 60x80 frustum.
struct SceneConfig {
    std::uint64_t seed = 1;
    double max_range = kDefaultMaxRange;

    // Workspace: obstacles are anchored at depths in `depth` and inside the
    // view cone given by the tangents of the half field of view.
    Range depth{1.5, 9.0};
    double fov_tan_x = 1.0;
    double fov_tan_y = 0.75;

    /// Fronto-parallel slabs with one rectangular hole.
    CountRange walls{0, 1};
    Range wall_width{2.0, 6.0};
    Range wall_height{1.5, 4.0};
    Range wall_hole_fraction{0.2, 0.5};
    double wall_thickness = 0.1;

    /// Axis-aligned boxes; edge lengths drawn per axis.
    CountRange boxes{1, 3};
    Range box_size{0.3, 1.5};

    /// Vertical square-section poles. Half widths stay well below typical
    /// robot sizes so the thin-obstacle regime is exercised.
    CountRange poles{1, 4};
    Range pole_half_width{0.015, 0.06};
    Range pole_height{2.0, 5.0};

    /// Trunk plus 3-5 thin oriented branches.
    CountRange trees{1, 2};
    Range trunk_half_width{0.03, 0.08};
    Range trunk_height{1.5, 4.0};
    Range branch_length{0.4, 1.5};
    Range branch_half_width{0.015, 0.04};

    /// Throws std::invalid_argument on empty or non-positive ranges, or when
    /// every class is disabled ("empty workspace").
    void validate() const;
};

SceneConfig scene_config_from_json(const std::string& text);
std::string scene_config_to_json(const SceneConfig& config);

/// Deterministic in `config` (bitwise). Each obstacle draws from its own
/// RNG stream keyed by (seed, class, index).
Scene generate_scene(const SceneConfig& config);

/// Axis-aligned cube mesh centered at `center`, half edge `r` (> 0).
/// 8 vertices, 12 triangles, outward winding.
TriangleMesh cube_mesh_at(Point3 center, double r);

TriangleMesh box_mesh(const Aabb& box);

/// Cuboid centered at `center` with orthonormal `axes` and half extents.
TriangleMesh oriented_box_mesh(Point3 center, const std::array<Point3, 3>& axes,
                               const std::array<double, 3>& half_extents);

TriangleMesh merge_meshes(const std::vector<TriangleMesh>& meshes);

/// Positions and faces only; boxes are emitted as 12-triangle meshes.
void export_obj(const std::filesystem::path& path, const Scene& scene);

}  // namespace collenc
