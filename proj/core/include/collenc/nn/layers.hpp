#pragma once

#include "collenc/nn/tensor.hpp"

// Single-sample layer kernels. Activations are (channels, height, width);
// vectors are rank 1. Backward functions add parameter gradients into the
// given accumulators and overwrite the input gradient (skipped when null).
namespace collenc::nn {

/// Output size of a convolution along one axis.
int conv_output_size(int in, int kernel, int stride, int padding);

/// x: (Cin, H, W), weight: (Cout, Cin, k, k), bias: (Cout).
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding);
void conv2d_backward(const Tensor& x, const Tensor& weight, int stride, int padding,
                     const Tensor& grad_out, Tensor* grad_x, Tensor& grad_weight,
                     Tensor& grad_bias);

/// Adjoint of conv2d in its input. x: (Cin, Hin, Win), weight: (Cin, Cout,
/// k, k), output (Cout, out_h, out_w) where a conv2d with the same stride and
/// padding maps out_h x out_w back to Hin x Win.
Tensor conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                        int padding, int out_h, int out_w);
void conv_transpose2d_backward(const Tensor& x, const Tensor& weight, int stride, int padding,
                               const Tensor& grad_out, Tensor* grad_x, Tensor& grad_weight,
                               Tensor& grad_bias);

/// x: (In), weight: (Out, In), bias: (Out).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
void linear_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out,
                     Tensor* grad_x, Tensor& grad_weight, Tensor& grad_bias);

/// ELU with alpha = 1.
Tensor elu(const Tensor& x);
Tensor elu_backward(const Tensor& x, const Tensor& grad_out);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

Tensor sigmoid(const Tensor& x);
/// Takes the forward output y = sigmoid(x).
Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out);

}  // namespace collenc::nn
