#include "collenc/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "collenc/image_io.hpp"
#include "collenc/rng.hpp"

namespace collenc {

void Aabb::expand(Point3 p) {
    min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
    max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
}

Aabb Aabb::empty() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {{inf, inf, inf}, {-inf, -inf, -inf}};
}

Aabb TriangleMesh::bounds() const {
    Aabb b = Aabb::empty();
    for (const Point3& p : vertices) b.expand(p);
    return b;
}

double TriangleMesh::surface_area() const {
    double area = 0.0;
    for (const auto& t : triangles) {
        const Point3 n = cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
        area += 0.5 * std::sqrt(dot(n, n));
    }
    return area;
}

namespace {

// Corner i of a cuboid has sign bits (x: bit 0, y: bit 1, z: bit 2). The
// faces below wind counter-clockwise seen from outside for a right-handed
// axis triple.
constexpr std::array<std::array<std::uint32_t, 3>, 12> kCuboidFaces{{
    {0, 4, 6}, {0, 6, 2},  // -x
    {1, 3, 7}, {1, 7, 5},  // +x
    {0, 1, 5}, {0, 5, 4},  // -y
    {2, 6, 7}, {2, 7, 3},  // +y
    {0, 2, 3}, {0, 3, 1},  // -z
    {4, 5, 7}, {4, 7, 6},  // +z
}};

TriangleMesh cuboid_from_corners(const std::array<Point3, 8>& corners) {
    TriangleMesh m;
    m.vertices.assign(corners.begin(), corners.end());
    m.triangles.assign(kCuboidFaces.begin(), kCuboidFaces.end());
    return m;
}

void check_range(const Range& r, const char* name, bool allow_zero = false) {
    const bool ok = allow_zero ? (r.lo >= 0.0 && r.hi >= r.lo) : (r.lo > 0.0 && r.hi >= r.lo);
    if (!ok || !std::isfinite(r.hi))
        throw std::invalid_argument(std::string("scene config: invalid range '") + name + "'");
}

void check_count(const CountRange& c, const char* name) {
    if (c.lo < 0 || c.hi < c.lo)
        throw std::invalid_argument(std::string("scene config: invalid count '") + name + "'");
}

enum class ObstacleClass : std::uint64_t { Wall = 1, Box = 2, Pole = 3, Tree = 4 };

CounterRng class_stream(std::uint64_t seed, ObstacleClass c, std::uint64_t index) {
    return CounterRng(derive_key(derive_key(seed, static_cast<std::uint64_t>(c)), index));
}

int draw_count(std::uint64_t seed, ObstacleClass c, const CountRange& range) {
    if (!range.enabled()) return 0;
    CounterRng rng = class_stream(seed, c, 0xC0C0C0C0ULL);
    return static_cast<int>(rng.uniform_int(std::max(1, range.lo), range.hi));
}

double draw(CounterRng& rng, const Range& r) { return rng.uniform(r.lo, r.hi); }

// Anchor point inside the view cone at a random depth.
Point3 draw_anchor(CounterRng& rng, const SceneConfig& c) {
    const double z = draw(rng, c.depth);
    const double x = rng.uniform(-0.9, 0.9) * c.fov_tan_x * z;
    const double y = rng.uniform(-0.9, 0.9) * c.fov_tan_y * z;
    return {x, y, z};
}

bool intersects_frustum(const Aabb& b, const SceneConfig& c) {
    if (!(b.max.z > 0.0) || b.min.z > c.max_range) return false;
    const double z = std::min(b.max.z, c.max_range);
    const double hx = z * c.fov_tan_x;
    const double hy = z * c.fov_tan_y;
    return b.max.x >= -hx && b.min.x <= hx && b.max.y >= -hy && b.min.y <= hy;
}

Point3 normalized(Point3 p) {
    const double n = std::sqrt(dot(p, p));
    return {p.x / n, p.y / n, p.z / n};
}

void add_wall(Scene& s, CounterRng rng, const SceneConfig& c) {
    const Point3 a = draw_anchor(rng, c);
    const double w = draw(rng, c.wall_width);
    const double h = draw(rng, c.wall_height);
    const double hole_w = w * draw(rng, c.wall_hole_fraction);
    const double hole_h = h * draw(rng, c.wall_hole_fraction);
    const double x0 = a.x - 0.5 * w, x1 = a.x + 0.5 * w;
    const double y0 = a.y - 0.5 * h, y1 = a.y + 0.5 * h;
    const double hx0 = rng.uniform(x0 + 0.1 * w, x1 - 0.1 * w - hole_w);
    const double hy0 = rng.uniform(y0 + 0.1 * h, y1 - 0.1 * h - hole_h);
    const double hx1 = hx0 + hole_w, hy1 = hy0 + hole_h;
    const double z0 = a.z, z1 = a.z + c.wall_thickness;
    const std::array<Aabb, 4> parts{{
        {{x0, y0, z0}, {hx0, y1, z1}},
        {{hx1, y0, z0}, {x1, y1, z1}},
        {{hx0, y0, z0}, {hx1, hy0, z1}},
        {{hx0, hy1, z0}, {hx1, y1, z1}},
    }};
    for (const Aabb& p : parts)
        if (intersects_frustum(p, c)) s.boxes.push_back(p);
}

void add_box(Scene& s, CounterRng rng, const SceneConfig& c) {
    const Point3 a = draw_anchor(rng, c);
    const Point3 half{0.5 * draw(rng, c.box_size), 0.5 * draw(rng, c.box_size),
                      0.5 * draw(rng, c.box_size)};
    const Aabb b{a - half, a + half};
    if (intersects_frustum(b, c)) s.boxes.push_back(b);
}

void add_pole(Scene& s, CounterRng rng, const SceneConfig& c) {
    const Point3 a = draw_anchor(rng, c);
    const double hw = draw(rng, c.pole_half_width);
    const double hh = 0.5 * draw(rng, c.pole_height);
    const Aabb b{{a.x - hw, a.y - hh, a.z - hw}, {a.x + hw, a.y + hh, a.z + hw}};
    if (intersects_frustum(b, c)) s.meshes.push_back(box_mesh(b));
}

void add_tree(Scene& s, CounterRng rng, const SceneConfig& c) {
    const Point3 a = draw_anchor(rng, c);
    const double tw = draw(rng, c.trunk_half_width);
    const double th = draw(rng, c.trunk_height);
    const double base = a.y - 0.5 * th;
    std::vector<TriangleMesh> parts;
    parts.push_back(box_mesh({{a.x - tw, base, a.z - tw}, {a.x + tw, base + th, a.z + tw}}));

    const auto branches = rng.uniform_int(3, 5);
    for (std::int64_t i = 0; i < branches; ++i) {
        const double attach = base + th * rng.uniform(0.3, 0.95);
        const double azimuth = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double elevation = rng.uniform(0.25, 1.05);
        const Point3 dir{std::cos(elevation) * std::cos(azimuth), std::sin(elevation),
                         std::cos(elevation) * std::sin(azimuth)};
        const double len = draw(rng, c.branch_length);
        const double bw = draw(rng, c.branch_half_width);
        const Point3 helper = std::abs(dir.y) < 0.9 ? Point3{0, 1, 0} : Point3{1, 0, 0};
        const Point3 a1 = normalized(cross(dir, helper));
        const Point3 a2 = cross(dir, a1);
        const Point3 center = Point3{a.x, attach, a.z} + (0.5 * len) * dir;
        parts.push_back(oriented_box_mesh(center, {dir, a1, a2}, {0.5 * len, bw, bw}));
    }
    TriangleMesh tree = merge_meshes(parts);
    if (intersects_frustum(tree.bounds(), c)) s.meshes.push_back(std::move(tree));
}

}  // namespace

void SceneConfig::validate() const {
    if (!(max_range > 0.0)) throw std::invalid_argument("scene config: max_range must be positive");
    check_range(depth, "depth");
    if (depth.hi > max_range) throw std::invalid_argument("scene config: depth exceeds max_range");
    if (!(fov_tan_x > 0.0) || !(fov_tan_y > 0.0))
        throw std::invalid_argument("scene config: field of view must be positive");
    check_count(walls, "walls");
    check_count(boxes, "boxes");
    check_count(poles, "poles");
    check_count(trees, "trees");
    if (!walls.enabled() && !boxes.enabled() && !poles.enabled() && !trees.enabled())
        throw std::invalid_argument("empty workspace");
    check_range(wall_width, "wall_width");
    check_range(wall_height, "wall_height");
    check_range(wall_hole_fraction, "wall_hole_fraction");
    if (wall_hole_fraction.hi >= 0.8)
        throw std::invalid_argument("scene config: wall_hole_fraction must stay below 0.8");
    if (!(wall_thickness > 0.0)) throw std::invalid_argument("scene config: wall_thickness");
    check_range(box_size, "box_size");
    check_range(pole_half_width, "pole_half_width");
    check_range(pole_height, "pole_height");
    check_range(trunk_half_width, "trunk_half_width");
    check_range(trunk_height, "trunk_height");
    check_range(branch_length, "branch_length");
    check_range(branch_half_width, "branch_half_width");
}

Scene generate_scene(const SceneConfig& config) {
    config.validate();
    Scene scene;
    const std::uint64_t seed = config.seed;
    const int nw = draw_count(seed, ObstacleClass::Wall, config.walls);
    for (int i = 0; i < nw; ++i) add_wall(scene, class_stream(seed, ObstacleClass::Wall, i), config);
    const int nb = draw_count(seed, ObstacleClass::Box, config.boxes);
    for (int i = 0; i < nb; ++i) add_box(scene, class_stream(seed, ObstacleClass::Box, i), config);
    const int np = draw_count(seed, ObstacleClass::Pole, config.poles);
    for (int i = 0; i < np; ++i) add_pole(scene, class_stream(seed, ObstacleClass::Pole, i), config);
    const int nt = draw_count(seed, ObstacleClass::Tree, config.trees);
    for (int i = 0; i < nt; ++i) add_tree(scene, class_stream(seed, ObstacleClass::Tree, i), config);
    return scene;
}

TriangleMesh cube_mesh_at(Point3 center, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("cube_mesh_at: r must be positive");
    return box_mesh({{center.x - r, center.y - r, center.z - r},
                     {center.x + r, center.y + r, center.z + r}});
}

TriangleMesh box_mesh(const Aabb& b) {
    std::array<Point3, 8> c;
    for (std::uint32_t i = 0; i < 8; ++i)
        c[i] = {(i & 1u) ? b.max.x : b.min.x, (i & 2u) ? b.max.y : b.min.y,
                (i & 4u) ? b.max.z : b.min.z};
    return cuboid_from_corners(c);
}

TriangleMesh oriented_box_mesh(Point3 center, const std::array<Point3, 3>& axes,
                               const std::array<double, 3>& half_extents) {
    std::array<Point3, 8> c;
    for (std::uint32_t i = 0; i < 8; ++i) {
        const double sx = (i & 1u) ? 1.0 : -1.0;
        const double sy = (i & 2u) ? 1.0 : -1.0;
        const double sz = (i & 4u) ? 1.0 : -1.0;
        c[i] = center + (sx * half_extents[0]) * axes[0] + (sy * half_extents[1]) * axes[1] +
               (sz * half_extents[2]) * axes[2];
    }
    return cuboid_from_corners(c);
}

TriangleMesh merge_meshes(const std::vector<TriangleMesh>& meshes) {
    TriangleMesh out;
    std::size_t nv = 0, nt = 0;
    for (const auto& m : meshes) {
        nv += m.vertices.size();
        nt += m.triangles.size();
    }
    out.vertices.reserve(nv);
    out.triangles.reserve(nt);
    for (const auto& m : meshes) {
        const auto offset = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.insert(out.vertices.end(), m.vertices.begin(), m.vertices.end());
        for (const auto& t : m.triangles)
            out.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
    }
    return out;
}

void export_obj(const std::filesystem::path& path, const Scene& scene) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.precision(9);
    std::size_t base = 1;
    auto emit = [&](const TriangleMesh& m) {
        for (const Point3& p : m.vertices) out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
        for (const auto& t : m.triangles)
            out << "f " << t[0] + base << ' ' << t[1] + base << ' ' << t[2] + base << '\n';
        base += m.vertices.size();
    };
    for (const Aabb& b : scene.boxes) emit(box_mesh(b));
    for (const TriangleMesh& m : scene.meshes) emit(m);
    if (!out) throw IoError("write failed: " + path.string());
}

// JSON schema: every field of SceneConfig under its own name; ranges are
// two-element arrays [lo, hi]. Missing keys keep their defaults.
namespace {

using nlohmann::json;

void read(const json& j, const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
}
void read(const json& j, const char* key, Range& out) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2)
        throw std::invalid_argument(std::string("scene config: '") + key + "' must be [lo, hi]");
    out = {a[0].get<double>(), a[1].get<double>()};
}
void read(const json& j, const char* key, CountRange& out) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (a.is_number_integer()) {
        out = {a.get<int>(), a.get<int>()};
        return;
    }
    if (!a.is_array() || a.size() != 2)
        throw std::invalid_argument(std::string("scene config: '") + key + "' must be [lo, hi]");
    out = {a[0].get<int>(), a[1].get<int>()};
}

}  // namespace

SceneConfig scene_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scene config: ") + e.what());
    }
    if (j.contains("scene")) j = j.at("scene");
    SceneConfig c;
    try {
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        read(j, "max_range", c.max_range);
        read(j, "depth", c.depth);
        read(j, "fov_tan_x", c.fov_tan_x);
        read(j, "fov_tan_y", c.fov_tan_y);
        read(j, "walls", c.walls);
        read(j, "wall_width", c.wall_width);
        read(j, "wall_height", c.wall_height);
        read(j, "wall_hole_fraction", c.wall_hole_fraction);
        read(j, "wall_thickness", c.wall_thickness);
        read(j, "boxes", c.boxes);
        read(j, "box_size", c.box_size);
        read(j, "poles", c.poles);
        read(j, "pole_half_width", c.pole_half_width);
        read(j, "pole_height", c.pole_height);
        read(j, "trees", c.trees);
        read(j, "trunk_half_width", c.trunk_half_width);
        read(j, "trunk_height", c.trunk_height);
        read(j, "branch_length", c.branch_length);
        read(j, "branch_half_width", c.branch_half_width);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scene config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string scene_config_to_json(const SceneConfig& c) {
    auto r = [](const Range& x) { return json::array({x.lo, x.hi}); };
    auto n = [](const CountRange& x) { return json::array({x.lo, x.hi}); };
    json j{
        {"seed", c.seed},
        {"max_range", c.max_range},
        {"depth", r(c.depth)},
        {"fov_tan_x", c.fov_tan_x},
        {"fov_tan_y", c.fov_tan_y},
        {"walls", n(c.walls)},
        {"wall_width", r(c.wall_width)},
        {"wall_height", r(c.wall_height)},
        {"wall_hole_fraction", r(c.wall_hole_fraction)},
        {"wall_thickness", c.wall_thickness},
        {"boxes", n(c.boxes)},
        {"box_size", r(c.box_size)},
        {"poles", n(c.poles)},
        {"pole_half_width", r(c.pole_half_width)},
        {"pole_height", r(c.pole_height)},
        {"trees", n(c.trees)},
        {"trunk_half_width", r(c.trunk_half_width)},
        {"trunk_height", r(c.trunk_height)},
        {"branch_length", r(c.branch_length)},
        {"branch_half_width", r(c.branch_half_width)},
    };
    return j.dump(2);
}

}  // namespace collenc
