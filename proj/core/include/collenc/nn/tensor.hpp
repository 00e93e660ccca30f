#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace collenc::nn {

/// 64-byte aligned storage. Eigen picks vectorization peeling from pointer
/// alignment, so a fixed alignment keeps results independent of where the
/// allocator happened to place a buffer.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};
    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using AlignedBuffer = std::vector<double, AlignedAllocator<double>>;

/// Dense row-major double tensor.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::span<const double> data);
    Tensor(std::vector<std::size_t> shape, AlignedBuffer data);

    [[nodiscard]] const std::vector<std::size_t>& shape() const { return shape_; }
    [[nodiscard]] std::size_t rank() const { return shape_.size(); }
    [[nodiscard]] std::size_t dim(std::size_t i) const { return shape_.at(i); }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    [[nodiscard]] std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    [[nodiscard]] const double* ptr() const { return data_.data(); }
    double* ptr() { return data_.data(); }
    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    /// Same data, new shape with equal element count.
    [[nodiscard]] Tensor reshaped(std::vector<std::size_t> shape) const&;
    [[nodiscard]] Tensor reshaped(std::vector<std::size_t> shape) &&;

    void fill(double value);
    Tensor& operator+=(const Tensor& other);
    Tensor& operator*=(double s);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    AlignedBuffer data_;
};

std::size_t element_count(std::span<const std::size_t> shape);
std::string shape_string(std::span<const std::size_t> shape);

}  // namespace collenc::nn
