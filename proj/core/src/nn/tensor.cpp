#include "collenc/nn/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace collenc::nn {

std::size_t element_count(std::span<const std::size_t> shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(std::span<const std::size_t> shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::span<const double> data)
    : Tensor(std::move(shape), AlignedBuffer(data.begin(), data.end())) {}

Tensor::Tensor(std::vector<std::size_t> shape, AlignedBuffer data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_))
        throw std::invalid_argument("tensor data does not match shape " + shape_string(shape_));
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const& {
    return Tensor(std::move(shape), data_);
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) && {
    return Tensor(std::move(shape), std::move(data_));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor& Tensor::operator+=(const Tensor& other) {
    if (other.size() != size()) throw std::invalid_argument("tensor += size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

}  // namespace collenc::nn
