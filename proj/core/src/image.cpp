#include "collenc/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace collenc {

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw std::invalid_argument("optical center outside the image");
}

double CameraIntrinsics::ray_scale(int u, int v) const {
    const double a = (cx - u) / fx;
    const double b = (cy - v) / fy;
    return std::sqrt(1.0 + a * a + b * b);
}

CameraIntrinsics CameraIntrinsics::desk_default(int width, int height) {
    CameraIntrinsics K;
    K.width = width;
    K.height = height;
    K.fx = 0.5 * width;
    K.fy = 0.5 * width;
    K.cx = 0.5 * (width - 1);
    K.cy = 0.5 * (height - 1);
    return K;
}

template <class Tag>
Grid<Tag>::Grid(int width, int height, std::vector<double> values, double max_range)
    : width_(width), height_(height), max_range_(max_range), values_(std::move(values)) {
    if (width < 0 || height < 0 ||
        values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("image data length does not match dimensions");
}

template class Grid<DepthTag>;
template class Grid<RangeTag>;

Point3 pixel_to_point(int u, int v, double z, const CameraIntrinsics& K) {
    if (!(z > 0.0)) throw std::invalid_argument("pixel_to_point: depth must be positive");
    return {(K.cx - u) / K.fx * z, (K.cy - v) / K.fy * z, z};
}

namespace {

template <class Out, class In>
Out rescale_rays(const In& in, const CameraIntrinsics& K, bool multiply) {
    if (!in.same_shape(K.width, K.height))
        throw std::invalid_argument("image dimensions " + std::to_string(in.width()) + "x" +
                                    std::to_string(in.height()) + " do not match intrinsics");
    Out out(in.width(), in.height(), in.max_range());
    for (int v = 0; v < in.height(); ++v) {
        for (int u = 0; u < in.width(); ++u) {
            const double x = in.at(u, v);
            if (x == kInvalid) continue;
            const double s = K.ray_scale(u, v);
            out.at(u, v) = multiply ? x * s : x / s;
        }
    }
    return out;
}

}  // namespace

RangeImage depth_to_range(const DepthImage& depth, const CameraIntrinsics& K) {
    return rescale_rays<RangeImage>(depth, K, true);
}

DepthImage range_to_depth(const RangeImage& range, const CameraIntrinsics& K) {
    return rescale_rays<DepthImage>(range, K, false);
}

MseResult masked_mse(std::span<const double> a, std::span<const double> b,
                     std::span<const std::uint8_t> mask) {
    if (a.size() != b.size() || a.size() != mask.size())
        throw std::invalid_argument("masked_mse: dimension mismatch");
    MseResult r;
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!mask[i]) continue;
        const double d = a[i] - b[i];
        sum += d * d;
        ++r.covered;
    }
    r.value = r.covered ? sum / static_cast<double>(r.covered) : 0.0;
    return r;
}

}  // namespace collenc
