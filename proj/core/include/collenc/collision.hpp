#pragma once

#include <cstdint>
#include <vector>

#include "collenc/image.hpp"

namespace collenc {

/// Value carried by pixels where the robot already collides at the camera.
inline constexpr double kCollisionFloor = 0.01;

struct PixelCoord {
    int u = 0;
    int v = 0;
    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Row-major ordered, duplicate-free pixel list.
using EdgeSet = std::vector<PixelCoord>;

/// Collision images share the depth layout: per pixel, the z-projected
/// distance a cube of half edge r travels along the ray before touching an
/// obstacle; kInvalid where nothing is reached within max_range.
using CollisionImage = DepthImage;

struct CollisionParams {
    double r = 0.25;                ///< robot half edge, meters
    double edge_threshold = 0.125;  ///< depth jump that marks an edge, meters
    double edge_fraction = 1.0;     ///< share of edge pixels that get a cube
    std::uint64_t seed = 0;         ///< edge subsampling stream

    /// Defaults for a robot of half edge r: threshold max(0.1, r/2), all edges.
    static CollisionParams for_robot(double r);
    void validate() const;
};

/// A valid pixel is an edge when a 4-neighbour is invalid or deeper by more
/// than `threshold`; only the nearer side of a jump is reported.
EdgeSet detect_edges(const DepthImage& depth, double threshold);

/// ceil(fraction * |edges|) pixels chosen by a seeded partial shuffle,
/// returned in their original order. fraction == 1 returns `edges`.
EdgeSet select_edge_subset(const EdgeSet& edges, double fraction, std::uint64_t seed);

/// Pulls every valid pixel closer by r along its ray: R^-1(R(D) - r), with
/// results below kCollisionFloor clamped to it. r == 0 returns `depth`.
DepthImage offset_image(const DepthImage& depth, const CameraIntrinsics& K, double r);

/// Depth image of the merged robot-sized cubes centred on the back-projected
/// edge pixels. Pixels no cube covers are invalid. If a cube contains the
/// camera centre every pixel reads kCollisionFloor.
DepthImage render_inflation(const DepthImage& depth, const EdgeSet& edges,
                            const CameraIntrinsics& K, double r, unsigned threads = 1);

/// Pixelwise minimum of render_inflation and offset_image, invalid acting as
/// +infinity. r == 0 returns `depth` unchanged.
CollisionImage collision_image(const DepthImage& depth, const CameraIntrinsics& K,
                               const CollisionParams& params, unsigned threads = 1);

/// Exhaustive reference: inflates every back-projected valid pixel by an
/// axis-aligned cube of half edge r and reports, per ray, the smallest
/// z-depth at which the ray enters any cube. O(pixels^2).
CollisionImage oracle_collision_image(const DepthImage& depth, const CameraIntrinsics& K,
                                      double r);

}  // namespace collenc
