#include <gtest/gtest.h>

#include <fstream>

#include "collenc/scene.hpp"
#include "test_support.hpp"

using namespace collenc;

namespace {

SceneConfig only_boxes() {
    SceneConfig c;
    c.walls = {0, 0};
    c.poles = {0, 0};
    c.trees = {0, 0};
    c.boxes = {2, 4};
    return c;
}

}  // namespace

TEST(GenerateScene, SameSeedIsIdentical) {
    SceneConfig c;
    c.seed = 17;
    EXPECT_EQ(generate_scene(c), generate_scene(c));
    SceneConfig d = c;
    d.seed = 18;
    EXPECT_NE(generate_scene(c), generate_scene(d));
}

TEST(GenerateScene, AllCountsZeroIsEmptyWorkspace) {
    SceneConfig c;
    c.walls = c.boxes = c.poles = c.trees = {0, 0};
    try {
        generate_scene(c);
        FAIL() << "expected an error";
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "empty workspace");
    }
}

TEST(GenerateScene, BoxesStayInsideConfiguredExtents) {
    SceneConfig c = only_boxes();
    c.seed = 1;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        c.seed = seed;
        const Scene s = generate_scene(c);
        ASSERT_FALSE(s.boxes.empty());
        EXPECT_TRUE(s.meshes.empty());
        for (const Aabb& b : s.boxes) {
            const Point3 center = 0.5 * (b.min + b.max);
            const Point3 size = b.max - b.min;
            EXPECT_GE(center.z, c.depth.lo - 1e-12);
            EXPECT_LE(center.z, c.depth.hi + 1e-12);
            EXPECT_LE(std::abs(center.x), c.fov_tan_x * center.z);
            EXPECT_LE(std::abs(center.y), c.fov_tan_y * center.z);
            for (double e : {size.x, size.y, size.z}) {
                EXPECT_GE(e, c.box_size.lo - 1e-12);
                EXPECT_LE(e, c.box_size.hi + 1e-12);
            }
        }
    }
}

TEST(GenerateScene, EveryEnabledClassPresentAndThinPolesThin) {
    SceneConfig c;
    c.walls = {1, 1};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        c.seed = seed;
        const Scene s = generate_scene(c);
        // Walls and boxes are boxes; poles and trees are meshes.
        EXPECT_GE(s.boxes.size(), 2u);
        EXPECT_GE(s.meshes.size(), 2u);
        for (const auto& m : s.meshes) {
            for (const auto& t : m.triangles)
                for (auto idx : t) ASSERT_LT(idx, m.vertices.size());
            // Thin cross-section well below the default robot half edge.
            const Aabb b = m.bounds();
            if (m.triangles.size() == 12) {
                EXPECT_LT(std::min(b.max.x - b.min.x, b.max.z - b.min.z), 2 * 0.25);
            }
        }
    }
}

TEST(GenerateScene, NoDegenerateTriangles) {
    SceneConfig c;
    c.seed = 5;
    const Scene s = generate_scene(c);
    for (const auto& m : s.meshes) {
        for (const auto& t : m.triangles) {
            const Point3 n = cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
            EXPECT_GT(dot(n, n), 0.0);
        }
    }
}

TEST(CubeMesh, VerticesSpanCenterPlusMinusR) {
    const TriangleMesh m = cube_mesh_at({0, 0, 4}, 0.5);
    EXPECT_EQ(m.vertices.size(), 8u);
    EXPECT_EQ(m.triangles.size(), 12u);
    const Aabb b = m.bounds();
    EXPECT_EQ(b.min, (Point3{-0.5, -0.5, 3.5}));
    EXPECT_EQ(b.max, (Point3{0.5, 0.5, 4.5}));
}

TEST(CubeMesh, SurfaceAreaIs24RSquared) {
    for (double r : {0.1, 0.25, 1.0}) EXPECT_NEAR(cube_mesh_at({1, 2, 3}, r).surface_area(), 24 * r * r, 1e-12);
}

TEST(CubeMesh, MinCornerHandArithmetic) {
    const Aabb b = cube_mesh_at({1, -1, 2}, 0.25).bounds();
    EXPECT_EQ(b.min, (Point3{0.75, -1.25, 1.75}));
}

TEST(CubeMesh, NonPositiveRadiusThrows) {
    EXPECT_THROW(cube_mesh_at({0, 0, 1}, 0.0), std::invalid_argument);
    EXPECT_THROW(cube_mesh_at({0, 0, 1}, -1.0), std::invalid_argument);
}

TEST(CubeMesh, OutwardWinding) {
    const TriangleMesh m = cube_mesh_at({0, 0, 0}, 1.0);
    for (const auto& t : m.triangles) {
        const Point3 n = cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
        const Point3 centroid = (1.0 / 3.0) * (m.vertices[t[0]] + m.vertices[t[1]] + m.vertices[t[2]]);
        EXPECT_GT(dot(n, centroid), 0.0);
    }
}

TEST(MergeMeshes, Counts) {
    EXPECT_TRUE(merge_meshes({}).empty());
    const TriangleMesh a = cube_mesh_at({0, 0, 4}, 0.5);
    EXPECT_EQ(merge_meshes({a}), a);
    const TriangleMesh m = merge_meshes({a, cube_mesh_at({1, 0, 4}, 0.5)});
    EXPECT_EQ(m.triangles.size(), 24u);
    EXPECT_EQ(m.vertices.size(), 16u);
    EXPECT_EQ(m.triangles[12][0], a.triangles[0][0] + 8);
}

TEST(SceneConfigJson, RoundTripAndNestedObject) {
    SceneConfig c;
    c.seed = 99;
    c.poles = {2, 2};
    c.pole_half_width = {0.02, 0.03};
    const SceneConfig back = scene_config_from_json(scene_config_to_json(c));
    EXPECT_EQ(back.seed, 99u);
    EXPECT_EQ(back.poles.lo, 2);
    EXPECT_EQ(back.pole_half_width.hi, 0.03);
    const SceneConfig nested = scene_config_from_json(R"({"scene": {"boxes": 3, "walls": [0, 0]}})");
    EXPECT_EQ(nested.boxes.lo, 3);
    EXPECT_EQ(nested.boxes.hi, 3);
    EXPECT_THROW(scene_config_from_json(R"({"depth": [5, 1]})"), std::invalid_argument);
    EXPECT_THROW(scene_config_from_json("{"), std::invalid_argument);
}

TEST(ExportObj, WritesVerticesAndFaces) {
    collenc::testing::TempDir dir("obj");
    Scene s;
    s.boxes.push_back({{0, 0, 1}, {1, 1, 2}});
    s.meshes.push_back(cube_mesh_at({0, 0, 4}, 0.5));
    export_obj(dir / "s.obj", s);
    std::ifstream in(dir / "s.obj");
    int v = 0, f = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("v ", 0) == 0) ++v;
        if (line.rfind("f ", 0) == 0) ++f;
    }
    EXPECT_EQ(v, 16);
    EXPECT_EQ(f, 24);
}
