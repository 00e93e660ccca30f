#include "collenc/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace collenc::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

struct ConvGeometry {
    int channels, in_h, in_w, kernel, stride, padding, out_h, out_w;

    [[nodiscard]] Eigen::Index rows() const { return Eigen::Index{channels} * kernel * kernel; }
    [[nodiscard]] Eigen::Index cols() const { return Eigen::Index{out_h} * out_w; }
};

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

// Rows are (c, ky, kx), columns are output positions.
void im2col(const double* image, const ConvGeometry& g, double* cols) {
    const auto ncols = static_cast<std::size_t>(g.cols());
    for (int c = 0; c < g.channels; ++c) {
        for (int ky = 0; ky < g.kernel; ++ky) {
            for (int kx = 0; kx < g.kernel; ++kx) {
                double* row = cols + ((static_cast<std::size_t>(c) * g.kernel + ky) * g.kernel + kx) * ncols;
                for (int oy = 0; oy < g.out_h; ++oy) {
                    const int iy = oy * g.stride + ky - g.padding;
                    double* dst = row + static_cast<std::size_t>(oy) * g.out_w;
                    if (iy < 0 || iy >= g.in_h) {
                        for (int ox = 0; ox < g.out_w; ++ox) dst[ox] = 0.0;
                        continue;
                    }
                    const double* src = image + (static_cast<std::size_t>(c) * g.in_h + iy) * g.in_w;
                    for (int ox = 0; ox < g.out_w; ++ox) {
                        const int ix = ox * g.stride + kx - g.padding;
                        dst[ox] = (ix >= 0 && ix < g.in_w) ? src[ix] : 0.0;
                    }
                }
            }
        }
    }
}

// Adjoint of im2col; `image` must be zeroed by the caller.
void col2im(const double* cols, const ConvGeometry& g, double* image) {
    const auto ncols = static_cast<std::size_t>(g.cols());
    for (int c = 0; c < g.channels; ++c) {
        for (int ky = 0; ky < g.kernel; ++ky) {
            for (int kx = 0; kx < g.kernel; ++kx) {
                const double* row =
                    cols + ((static_cast<std::size_t>(c) * g.kernel + ky) * g.kernel + kx) * ncols;
                for (int oy = 0; oy < g.out_h; ++oy) {
                    const int iy = oy * g.stride + ky - g.padding;
                    if (iy < 0 || iy >= g.in_h) continue;
                    const double* src = row + static_cast<std::size_t>(oy) * g.out_w;
                    double* dst = image + (static_cast<std::size_t>(c) * g.in_h + iy) * g.in_w;
                    for (int ox = 0; ox < g.out_w; ++ox) {
                        const int ix = ox * g.stride + kx - g.padding;
                        if (ix >= 0 && ix < g.in_w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

ConvGeometry conv_geometry(const Tensor& x, const Tensor& w, int stride, int padding) {
    require(x.rank() == 3, "conv2d: input must be (C, H, W)");
    require(w.rank() == 4 && w.dim(2) == w.dim(3), "conv2d: weight must be (Cout, Cin, k, k)");
    require(w.dim(1) == x.dim(0), "conv2d: channel mismatch");
    require(stride >= 1 && padding >= 0, "conv2d: bad stride or padding");
    ConvGeometry g{static_cast<int>(x.dim(0)), static_cast<int>(x.dim(1)), static_cast<int>(x.dim(2)),
                   static_cast<int>(w.dim(2)), stride, padding, 0, 0};
    g.out_h = conv_output_size(g.in_h, g.kernel, stride, padding);
    g.out_w = conv_output_size(g.in_w, g.kernel, stride, padding);
    require(g.out_h >= 1 && g.out_w >= 1, "conv2d: kernel larger than padded input");
    return g;
}

ConvGeometry transpose_geometry(const Tensor& x, const Tensor& w, int stride, int padding,
                                int out_h, int out_w) {
    require(x.rank() == 3, "conv_transpose2d: input must be (C, H, W)");
    require(w.rank() == 4 && w.dim(2) == w.dim(3), "conv_transpose2d: weight must be (Cin, Cout, k, k)");
    require(w.dim(0) == x.dim(0), "conv_transpose2d: channel mismatch");
    const int k = static_cast<int>(w.dim(2));
    ConvGeometry g{static_cast<int>(w.dim(1)), out_h, out_w, k, stride, padding,
                   static_cast<int>(x.dim(1)), static_cast<int>(x.dim(2))};
    require(conv_output_size(out_h, k, stride, padding) == g.out_h &&
                conv_output_size(out_w, k, stride, padding) == g.out_w,
            "conv_transpose2d: output size inconsistent with input size");
    return g;
}

}  // namespace

int conv_output_size(int in, int kernel, int stride, int padding) {
    return (in + 2 * padding - kernel) / stride + 1;
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding) {
    const ConvGeometry g = conv_geometry(x, weight, stride, padding);
    const auto cout = static_cast<Eigen::Index>(weight.dim(0));
    require(bias.size() == static_cast<std::size_t>(cout), "conv2d: bias size");
    AlignedBuffer cols(static_cast<std::size_t>(g.rows() * g.cols()));
    im2col(x.ptr(), g, cols.data());
    Tensor out({static_cast<std::size_t>(cout), static_cast<std::size_t>(g.out_h),
                static_cast<std::size_t>(g.out_w)});
    MatMap y(out.ptr(), cout, g.cols());
    y.noalias() = ConstMatMap(weight.ptr(), cout, g.rows()) * ConstMatMap(cols.data(), g.rows(), g.cols());
    y.colwise() += ConstVecMap(bias.ptr(), cout);
    return out;
}

void conv2d_backward(const Tensor& x, const Tensor& weight, int stride, int padding,
                     const Tensor& grad_out, Tensor* grad_x, Tensor& grad_weight,
                     Tensor& grad_bias) {
    const ConvGeometry g = conv_geometry(x, weight, stride, padding);
    const auto cout = static_cast<Eigen::Index>(weight.dim(0));
    require(grad_out.size() == static_cast<std::size_t>(cout * g.cols()), "conv2d_backward: grad shape");
    AlignedBuffer cols(static_cast<std::size_t>(g.rows() * g.cols()));
    im2col(x.ptr(), g, cols.data());
    const ConstMatMap dy(grad_out.ptr(), cout, g.cols());
    const ConstMatMap c(cols.data(), g.rows(), g.cols());
    MatMap(grad_weight.ptr(), cout, g.rows()).noalias() += dy * c.transpose();
    VecMap(grad_bias.ptr(), cout) += dy.rowwise().sum();
    if (grad_x) {
        MatMap dc(cols.data(), g.rows(), g.cols());
        dc.noalias() = ConstMatMap(weight.ptr(), cout, g.rows()).transpose() * dy;
        *grad_x = Tensor(x.shape());
        col2im(cols.data(), g, grad_x->ptr());
    }
}

Tensor conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                        int padding, int out_h, int out_w) {
    const ConvGeometry g = transpose_geometry(x, weight, stride, padding, out_h, out_w);
    const auto cin = static_cast<Eigen::Index>(x.dim(0));
    require(bias.size() == static_cast<std::size_t>(g.channels), "conv_transpose2d: bias size");
    AlignedBuffer cols(static_cast<std::size_t>(g.rows() * g.cols()));
    MatMap(cols.data(), g.rows(), g.cols()).noalias() =
        ConstMatMap(weight.ptr(), cin, g.rows()).transpose() * ConstMatMap(x.ptr(), cin, g.cols());
    Tensor out({static_cast<std::size_t>(g.channels), static_cast<std::size_t>(out_h),
                static_cast<std::size_t>(out_w)});
    col2im(cols.data(), g, out.ptr());
    const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
    for (int c = 0; c < g.channels; ++c)
        for (std::size_t i = 0; i < plane; ++i) out[c * plane + i] += bias[static_cast<std::size_t>(c)];
    return out;
}

void conv_transpose2d_backward(const Tensor& x, const Tensor& weight, int stride, int padding,
                               const Tensor& grad_out, Tensor* grad_x, Tensor& grad_weight,
                               Tensor& grad_bias) {
    require(grad_out.rank() == 3, "conv_transpose2d_backward: grad must be (C, H, W)");
    const int out_h = static_cast<int>(grad_out.dim(1)), out_w = static_cast<int>(grad_out.dim(2));
    const ConvGeometry g = transpose_geometry(x, weight, stride, padding, out_h, out_w);
    const auto cin = static_cast<Eigen::Index>(x.dim(0));
    AlignedBuffer cols(static_cast<std::size_t>(g.rows() * g.cols()));
    im2col(grad_out.ptr(), g, cols.data());
    const ConstMatMap dc(cols.data(), g.rows(), g.cols());
    MatMap(grad_weight.ptr(), cin, g.rows()).noalias() += ConstMatMap(x.ptr(), cin, g.cols()) * dc.transpose();
    const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
    for (int c = 0; c < g.channels; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < plane; ++i) s += grad_out[c * plane + i];
        grad_bias[static_cast<std::size_t>(c)] += s;
    }
    if (grad_x) {
        *grad_x = Tensor(x.shape());
        MatMap(grad_x->ptr(), cin, g.cols()).noalias() = ConstMatMap(weight.ptr(), cin, g.rows()) * dc;
    }
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    require(weight.rank() == 2 && weight.dim(1) == x.size(), "linear: weight shape");
    require(bias.size() == weight.dim(0), "linear: bias size");
    const auto out_n = static_cast<Eigen::Index>(weight.dim(0));
    const auto in_n = static_cast<Eigen::Index>(weight.dim(1));
    Tensor y({weight.dim(0)});
    VecMap(y.ptr(), out_n).noalias() =
        ConstMatMap(weight.ptr(), out_n, in_n) * ConstVecMap(x.ptr(), in_n) + ConstVecMap(bias.ptr(), out_n);
    return y;
}

void linear_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out,
                     Tensor* grad_x, Tensor& grad_weight, Tensor& grad_bias) {
    const auto out_n = static_cast<Eigen::Index>(weight.dim(0));
    const auto in_n = static_cast<Eigen::Index>(weight.dim(1));
    require(grad_out.size() == static_cast<std::size_t>(out_n) && x.size() == static_cast<std::size_t>(in_n),
            "linear_backward: shape mismatch");
    const ConstVecMap dy(grad_out.ptr(), out_n);
    MatMap(grad_weight.ptr(), out_n, in_n).noalias() += dy * ConstVecMap(x.ptr(), in_n).transpose();
    VecMap(grad_bias.ptr(), out_n) += dy;
    if (grad_x) {
        *grad_x = Tensor(x.shape());
        VecMap(grad_x->ptr(), in_n).noalias() = ConstMatMap(weight.ptr(), out_n, in_n).transpose() * dy;
    }
}

namespace {

template <class F>
Tensor map(const Tensor& x, F f) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
    return y;
}

template <class F>
Tensor map2(const Tensor& a, const Tensor& g, F f) {
    require(a.size() == g.size(), "activation backward: size mismatch");
    Tensor y(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = f(a[i], g[i]);
    return y;
}

}  // namespace

Tensor elu(const Tensor& x) {
    return map(x, [](double v) { return v > 0.0 ? v : std::expm1(v); });
}

Tensor elu_backward(const Tensor& x, const Tensor& grad_out) {
    return map2(x, grad_out, [](double v, double g) { return v > 0.0 ? g : g * std::exp(v); });
}

Tensor relu(const Tensor& x) {
    return map(x, [](double v) { return v > 0.0 ? v : 0.0; });
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
    return map2(x, grad_out, [](double v, double g) { return v > 0.0 ? g : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
    return map(x, [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
    });
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out) {
    return map2(y, grad_out, [](double s, double g) { return g * s * (1.0 - s); });
}

}  // namespace collenc::nn
