#pragma once

#include <optional>

#include "collenc/image.hpp"
#include "collenc/scene.hpp"

namespace collenc {

/// Minimum parameter for a ray-triangle hit, in units of |direction|.
inline constexpr double kRayEpsilon = 1e-6;
/// Hits whose z-depth is below this are ignored by raycast_depth.
inline constexpr double kNearPlane = 1e-4;

/// Unit direction of the ray through pixel (u, v); proportional to
/// ((cx-u)/fx, (cy-v)/fy, 1) so that pixel_to_point(u, v, z) lies on it.
Point3 ray_for_pixel(int u, int v, const CameraIntrinsics& K);

/// Smallest t > kRayEpsilon with origin + t*direction on the triangle. Edges
/// are inclusive up to a 1e-9 barycentric tolerance, so rays through a
/// shared edge hit at least one of the two triangles.
std::optional<double> intersect_ray_triangle(Point3 origin, Point3 direction, Point3 a, Point3 b,
                                             Point3 c);

/// Slab test. Returns the entry distance, or 0 when the origin is inside.
std::optional<double> intersect_ray_box(Point3 origin, Point3 direction, const Aabb& box);

/// Z-depth of the nearest surface per pixel; no hit, or a hit deeper than
/// max_range, yields kInvalid. Pixels are independent, so the output does
/// not depend on `threads` (0 = hardware concurrency).
DepthImage raycast_depth(const Scene& scene, const CameraIntrinsics& K,
                         double max_range = kDefaultMaxRange, unsigned threads = 1);

}  // namespace collenc
