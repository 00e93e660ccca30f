#include "collenc/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "collenc/parallel.hpp"

namespace collenc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBarycentricSlack = 1e-9;

struct SlabHit {
    double enter;
    double exit;
};

// Parametric interval of the ray inside the box, unclipped at t = 0.
std::optional<SlabHit> slab(Point3 o, Point3 inv_d, const Aabb& b) {
    double t0 = -kInf, t1 = kInf;
    const std::array<double, 3> origin{o.x, o.y, o.z};
    const std::array<double, 3> inv{inv_d.x, inv_d.y, inv_d.z};
    const std::array<double, 3> lo{b.min.x, b.min.y, b.min.z};
    const std::array<double, 3> hi{b.max.x, b.max.y, b.max.z};
    for (int i = 0; i < 3; ++i) {
        if (std::isinf(inv[i])) {
            if (origin[i] < lo[i] || origin[i] > hi[i]) return std::nullopt;
            continue;
        }
        double a = (lo[i] - origin[i]) * inv[i];
        double c = (hi[i] - origin[i]) * inv[i];
        if (a > c) std::swap(a, c);
        t0 = std::max(t0, a);
        t1 = std::min(t1, c);
    }
    if (t0 > t1 || t1 < 0.0) return std::nullopt;
    return SlabHit{t0, t1};
}

Point3 inverse(Point3 d) { return {1.0 / d.x, 1.0 / d.y, 1.0 / d.z}; }

// Bounding volume hierarchy over one mesh, median split on the widest axis.
class MeshAccel {
public:
    explicit MeshAccel(const TriangleMesh& mesh) : mesh_(&mesh) {
        order_.resize(mesh.triangles.size());
        std::iota(order_.begin(), order_.end(), 0u);
        centroids_.reserve(mesh.triangles.size());
        for (const auto& t : mesh.triangles) {
            const Point3 s = mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]];
            centroids_.push_back((1.0 / 3.0) * s);
        }
        if (!order_.empty()) build(0, static_cast<std::uint32_t>(order_.size()));
    }

    // Nearest hit parameter with z-depth (t * dz) at least `near`.
    [[nodiscard]] double nearest(Point3 o, Point3 d, Point3 inv_d, double near) const {
        double best = kInf;
        if (nodes_.empty()) return best;
        std::array<std::uint32_t, 64> stack{};
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& n = nodes_[stack[--top]];
            const auto box = slab(o, inv_d, n.bounds);
            if (!box || box->enter > best) continue;
            if (n.count > 0) {
                for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
                    const auto& t = mesh_->triangles[order_[i]];
                    const auto hit = intersect_ray_triangle(o, d, mesh_->vertices[t[0]],
                                                            mesh_->vertices[t[1]],
                                                            mesh_->vertices[t[2]]);
                    if (hit && *hit < best && *hit * d.z >= near) best = *hit;
                }
            } else {
                stack[top++] = n.first;
                stack[top++] = n.first + 1;
            }
        }
        return best;
    }

private:
    struct Node {
        Aabb bounds;
        std::uint32_t first = 0;  // child index for inner nodes, triangle offset for leaves
        std::uint32_t count = 0;  // 0 for inner nodes
    };

    static constexpr std::uint32_t kLeafSize = 4;

    void build(std::uint32_t begin, std::uint32_t end) {
        nodes_.push_back({});
        build_node(0, begin, end, 0);
    }

    void build_node(std::size_t index, std::uint32_t begin, std::uint32_t end, int depth) {
        Aabb bounds = Aabb::empty();
        Aabb cbounds = Aabb::empty();
        for (std::uint32_t i = begin; i < end; ++i) {
            const auto& t = mesh_->triangles[order_[i]];
            for (auto vi : t) bounds.expand(mesh_->vertices[vi]);
            cbounds.expand(centroids_[order_[i]]);
        }
        nodes_[index].bounds = bounds;
        if (end - begin <= kLeafSize || depth >= 60) {
            nodes_[index].first = begin;
            nodes_[index].count = end - begin;
            return;
        }
        const Point3 ext = cbounds.max - cbounds.min;
        const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
        auto key = [&](std::uint32_t tri) {
            const Point3& c = centroids_[tri];
            return axis == 0 ? c.x : (axis == 1 ? c.y : c.z);
        };
        const std::uint32_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             const double ka = key(a), kb = key(b);
                             return ka < kb || (ka == kb && a < b);
                         });
        const auto left = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({});
        nodes_.push_back({});
        nodes_[index].first = left;
        nodes_[index].count = 0;
        build_node(left, begin, mid, depth + 1);
        build_node(left + 1, mid, end, depth + 1);
    }

    const TriangleMesh* mesh_;
    std::vector<std::uint32_t> order_;
    std::vector<Point3> centroids_;
    std::vector<Node> nodes_;
};

}  // namespace

Point3 ray_for_pixel(int u, int v, const CameraIntrinsics& K) {
    const Point3 d{(K.cx - u) / K.fx, (K.cy - v) / K.fy, 1.0};
    const double n = std::sqrt(dot(d, d));
    return {d.x / n, d.y / n, d.z / n};
}

std::optional<double> intersect_ray_triangle(Point3 o, Point3 d, Point3 a, Point3 b, Point3 c) {
    const Point3 e1 = b - a;
    const Point3 e2 = c - a;
    const Point3 p = cross(d, e2);
    const double det = dot(e1, p);
    const double scale = std::sqrt(dot(e1, e1) * dot(e2, e2) * dot(d, d));
    if (!(std::abs(det) > 1e-12 * scale)) return std::nullopt;
    const double inv = 1.0 / det;
    const Point3 s = o - a;
    const double bu = dot(s, p) * inv;
    if (bu < -kBarycentricSlack || bu > 1.0 + kBarycentricSlack) return std::nullopt;
    const Point3 q = cross(s, e1);
    const double bv = dot(d, q) * inv;
    if (bv < -kBarycentricSlack || bu + bv > 1.0 + kBarycentricSlack) return std::nullopt;
    const double t = dot(e2, q) * inv;
    if (!(t > kRayEpsilon)) return std::nullopt;
    return t;
}

std::optional<double> intersect_ray_box(Point3 origin, Point3 direction, const Aabb& box) {
    const auto hit = slab(origin, inverse(direction), box);
    if (!hit) return std::nullopt;
    return std::max(hit->enter, 0.0);
}

DepthImage raycast_depth(const Scene& scene, const CameraIntrinsics& K, double max_range,
                         unsigned threads) {
    K.validate();
    DepthImage out(K.width, K.height, max_range);
    if (scene.empty()) return out;

    std::vector<MeshAccel> accels;
    accels.reserve(scene.meshes.size());
    for (const auto& m : scene.meshes) accels.emplace_back(m);

    const Point3 origin{0.0, 0.0, 0.0};
    parallel_for(static_cast<std::size_t>(K.height), threads, [&](std::size_t row) {
        const int v = static_cast<int>(row);
        for (int u = 0; u < K.width; ++u) {
            // Unnormalized direction with dz = 1: the hit parameter is the z-depth.
            const Point3 d{(K.cx - u) / K.fx, (K.cy - v) / K.fy, 1.0};
            const Point3 inv_d = inverse(d);
            double best = kInf;
            for (const Aabb& b : scene.boxes) {
                const auto hit = slab(origin, inv_d, b);
                if (!hit) continue;
                const double t = hit->enter >= kNearPlane ? hit->enter : hit->exit;
                if (t >= kNearPlane && t < best) best = t;
            }
            for (const MeshAccel& a : accels) best = std::min(best, a.nearest(origin, d, inv_d, kNearPlane));
            if (best <= max_range) out.at(u, v) = best;
        }
    });
    return out;
}

}  // namespace collenc
