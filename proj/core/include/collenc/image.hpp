#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace collenc {

/// Default sensor range in meters; depth values are clamped to it at scene
/// generation and normalized by it in the neural pipeline.
inline constexpr double kDefaultMaxRange = 10.0;

/// Invalid-pixel sentinel shared by every image kind.
inline constexpr double kInvalid = 0.0;

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point3&, const Point3&) = default;
};

inline Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, Point3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Point3 a, Point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Point3 cross(Point3 a, Point3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Pinhole camera. Pixel (u, v) is column u, row v; the ray through it has
/// slope ((cx - u) / fx, (cy - v) / fy) per unit of z.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    /// Throws std::invalid_argument unless fx, fy > 0, 0 <= cx < width and
    /// 0 <= cy < height.
    void validate() const;

    [[nodiscard]] std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    /// Ray scale s(u, v) = sqrt(1 + ((cx-u)/fx)^2 + ((cy-v)/fy)^2); range = depth * s.
    [[nodiscard]] double ray_scale(int u, int v) const;

    /// Camera used throughout the desk-scale pipeline: fx = fy = width / 2,
    /// optical center at the geometric image center.
    static CameraIntrinsics desk_default(int width, int height);

    friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Row-major float grid (v outer, u inner) with 0.0 marking invalid pixels.
/// The tag distinguishes z-depth from Euclidean range at compile time.
template <class Tag>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, double max_range = kDefaultMaxRange)
        : width_(width), height_(height), max_range_(max_range),
          values_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), kInvalid) {}
    Grid(int width, int height, std::vector<double> values, double max_range = kDefaultMaxRange);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] double max_range() const { return max_range_; }
    void set_max_range(double r) { max_range_ = r; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }

    [[nodiscard]] double at(int u, int v) const { return values_[index(u, v)]; }
    double& at(int u, int v) { return values_[index(u, v)]; }
    [[nodiscard]] bool valid(int u, int v) const { return at(u, v) != kInvalid; }
    [[nodiscard]] std::size_t index(int u, int v) const {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(u);
    }

    [[nodiscard]] std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    [[nodiscard]] bool same_shape(int w, int h) const { return w == width_ && h == height_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    double max_range_ = kDefaultMaxRange;
    std::vector<double> values_;
};

struct DepthTag {};
struct RangeTag {};
using DepthImage = Grid<DepthTag>;
using RangeImage = Grid<RangeTag>;

/// One byte per pixel, non-zero = valid.
using ValidityMask = std::vector<std::uint8_t>;

template <class Tag>
ValidityMask validity_mask(const Grid<Tag>& image) {
    ValidityMask mask(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) mask[i] = image[i] != kInvalid ? 1 : 0;
    return mask;
}

/// Back-projection of pixel (u, v) at z-depth z. Throws on z <= 0.
Point3 pixel_to_point(int u, int v, double z, const CameraIntrinsics& K);

RangeImage depth_to_range(const DepthImage& depth, const CameraIntrinsics& K);
DepthImage range_to_depth(const RangeImage& range, const CameraIntrinsics& K);

struct MseResult {
    double value = 0.0;
    std::size_t covered = 0;  ///< pixels that entered the mean

    [[nodiscard]] bool empty_coverage() const { return covered == 0; }
};

/// Mean squared difference over pixels whose mask entry is non-zero.
MseResult masked_mse(std::span<const double> a, std::span<const double> b,
                     std::span<const std::uint8_t> mask);

template <class TagA, class TagB>
MseResult masked_mse(const Grid<TagA>& a, const Grid<TagB>& b, const ValidityMask& mask) {
    return masked_mse(a.values(), b.values(), mask);
}

}  // namespace collenc
