#include "collenc/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "collenc/render.hpp"
#include "collenc/rng.hpp"
#include "collenc/scene.hpp"

namespace collenc {

CollisionParams CollisionParams::for_robot(double r) {
    CollisionParams p;
    p.r = r;
    p.edge_threshold = std::max(0.1, 0.5 * r);
    return p;
}

void CollisionParams::validate() const {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("robot r must be >= 0");
    if (!(edge_threshold > 0.0)) throw std::invalid_argument("edge_threshold must be positive");
    if (!(edge_fraction > 0.0 && edge_fraction <= 1.0))
        throw std::invalid_argument("edge_fraction must lie in (0, 1]");
}

EdgeSet detect_edges(const DepthImage& depth, double threshold) {
    EdgeSet edges;
    const int w = depth.width(), h = depth.height();
    auto is_edge = [&](int u, int v) {
        const double z = depth.at(u, v);
        constexpr int du[4] = {-1, 1, 0, 0};
        constexpr int dv[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            const int nu = u + du[k], nv = v + dv[k];
            if (nu < 0 || nv < 0 || nu >= w || nv >= h) continue;
            const double n = depth.at(nu, nv);
            if (n == kInvalid || n - z > threshold) return true;
        }
        return false;
    };
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            if (depth.valid(u, v) && is_edge(u, v)) edges.push_back({u, v});
    return edges;
}

EdgeSet select_edge_subset(const EdgeSet& edges, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("edge_fraction must lie in (0, 1]");
    if (fraction == 1.0) return edges;
    const std::size_t n = edges.size();
    const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    CounterRng rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n - 1)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    EdgeSet out;
    out.reserve(keep);
    for (std::size_t i : idx) out.push_back(edges[i]);
    return out;
}

DepthImage offset_image(const DepthImage& depth, const CameraIntrinsics& K, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("offset_image: r must be >= 0");
    if (!depth.same_shape(K.width, K.height))
        throw std::invalid_argument("offset_image: dimension mismatch");
    if (r == 0.0) return depth;
    RangeImage range = depth_to_range(depth, K);
    for (double& x : range.values())
        if (x != kInvalid) x -= r;
    DepthImage out = range_to_depth(range, K);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (depth[i] != kInvalid && out[i] < kCollisionFloor) out[i] = kCollisionFloor;
    return out;
}

DepthImage render_inflation(const DepthImage& depth, const EdgeSet& edges,
                            const CameraIntrinsics& K, double r, unsigned threads) {
    if (!(r > 0.0)) throw std::invalid_argument("render_inflation: r must be positive");
    if (!depth.same_shape(K.width, K.height))
        throw std::invalid_argument("render_inflation: dimension mismatch");
    DepthImage out(depth.width(), depth.height(), depth.max_range());
    if (edges.empty()) return out;

    std::vector<TriangleMesh> cubes;
    cubes.reserve(edges.size());
    for (const PixelCoord& e : edges) {
        const Point3 p = pixel_to_point(e.u, e.v, depth.at(e.u, e.v), K);
        if (std::abs(p.x) <= r && std::abs(p.y) <= r && std::abs(p.z) <= r) {
            std::fill(out.values().begin(), out.values().end(), kCollisionFloor);
            return out;
        }
        cubes.push_back(cube_mesh_at(p, r));
    }
    Scene scene;
    scene.meshes.push_back(merge_meshes(cubes));
    return raycast_depth(scene, K, depth.max_range(), threads);
}

CollisionImage collision_image(const DepthImage& depth, const CameraIntrinsics& K,
                               const CollisionParams& params, unsigned threads) {
    params.validate();
    K.validate();
    if (!depth.same_shape(K.width, K.height))
        throw std::invalid_argument("collision_image: dimension mismatch");
    if (params.r == 0.0) return depth;

    const EdgeSet edges = select_edge_subset(detect_edges(depth, params.edge_threshold),
                                             params.edge_fraction, params.seed);
    const DepthImage inflated = render_inflation(depth, edges, K, params.r, threads);
    const DepthImage offset = offset_image(depth, K, params.r);

    CollisionImage out(depth.width(), depth.height(), depth.max_range());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double a = inflated[i], b = offset[i];
        if (a == kInvalid) out[i] = b;
        else if (b == kInvalid) out[i] = a;
        else out[i] = std::min(a, b);
    }
    return out;
}

CollisionImage oracle_collision_image(const DepthImage& depth, const CameraIntrinsics& K,
                                      double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("oracle: r must be >= 0");
    if (!depth.same_shape(K.width, K.height))
        throw std::invalid_argument("oracle: dimension mismatch");
    // A zero-size cube is met only by the pixel's own point, at its own depth.
    if (r == 0.0) return depth;

    std::vector<Point3> cloud;
    for (int v = 0; v < depth.height(); ++v)
        for (int u = 0; u < depth.width(); ++u)
            if (depth.valid(u, v)) cloud.push_back(pixel_to_point(u, v, depth.at(u, v), K));

    constexpr double inf = std::numeric_limits<double>::infinity();
    CollisionImage out(depth.width(), depth.height(), depth.max_range());
    for (int v = 0; v < depth.height(); ++v) {
        for (int u = 0; u < depth.width(); ++u) {
            // Ray t * (a, b, 1): the parameter t is the z-depth.
            const double a = (K.cx - u) / K.fx;
            const double b = (K.cy - v) / K.fy;
            double best = inf;
            for (const Point3& q : cloud) {
                double lo = std::max(0.0, q.z - r);
                double hi = q.z + r;
                auto clip = [&](double slope, double c) {
                    if (slope == 0.0) {
                        if (std::abs(c) > r) hi = -inf;
                        return;
                    }
                    double t0 = (c - r) / slope, t1 = (c + r) / slope;
                    if (t0 > t1) std::swap(t0, t1);
                    lo = std::max(lo, t0);
                    hi = std::min(hi, t1);
                };
                clip(a, q.x);
                clip(b, q.y);
                if (lo <= hi && lo < best) best = lo;
            }
            if (best <= depth.max_range()) out.at(u, v) = std::max(best, kCollisionFloor);
        }
    }
    return out;
}

}  // namespace collenc
