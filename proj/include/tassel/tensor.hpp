#pragma once

#include <cmath>
#include <cstdint>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tassel/error.hpp"

namespace tassel {

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& shape) {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

/// Over-aligned allocator. Eigen picks its vectorized code path from the
/// buffer address, so a fixed alignment keeps summation order, and therefore
/// results, identical from run to run.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() noexcept = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

/// Dense row-major array of reals.
template <typename Real>
class Tensor {
public:
    using value_type = Real;

    Tensor() = default;

    explicit Tensor(Shape shape, Real fill = Real(0)) : shape_(std::move(shape)) {
        check_shape();
        data_.assign(static_cast<std::size_t>(shape_numel(shape_)), fill);
    }

    using Storage = std::vector<Real, AlignedAllocator<Real>>;

    Tensor(Shape shape, const std::vector<Real>& data) : Tensor(std::move(shape), Storage(data.begin(), data.end())) {}

    Tensor(Shape shape, Storage data) : shape_(std::move(shape)), data_(std::move(data)) {
        check_shape();
        if (static_cast<std::int64_t>(data_.size()) != shape_numel(shape_))
            throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                             shape_str(shape_));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), Real(0)); }
    static Tensor full(Shape shape, Real v) { return Tensor(std::move(shape), v); }
    static Tensor scalar(Real v) { return Tensor(Shape{1}, Storage{v}); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::int64_t dim(std::size_t i) const { return shape_.at(i); }
    std::int64_t numel() const noexcept { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<Real> data() noexcept { return data_; }
    std::span<const Real> data() const noexcept { return data_; }
    Real* ptr() noexcept { return data_.data(); }
    const Real* ptr() const noexcept { return data_.data(); }
    std::vector<Real> to_vector() const { return {data_.begin(), data_.end()}; }

    Real& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    Real operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    Real& at(std::int64_t r, std::int64_t c) { return data_[static_cast<std::size_t>(r * shape_.back() + c)]; }
    Real at(std::int64_t r, std::int64_t c) const {
        return data_[static_cast<std::size_t>(r * shape_.back() + c)];
    }

    Real item() const {
        if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
        return data_[0];
    }

    Tensor reshaped(Shape shape) const {
        if (shape_numel(shape) != numel())
            throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
        return Tensor(std::move(shape), data_);
    }

    template <typename Other>
    Tensor<Other> cast() const {
        typename Tensor<Other>::Storage out(data_.begin(), data_.end());
        return Tensor<Other>(shape_, std::move(out));
    }

    bool all_finite() const {
        for (Real v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Tensor& o) const noexcept { return shape_ == o.shape_; }

private:
    void check_shape() const {
        for (auto d : shape_)
            if (d <= 0) throw ShapeError("non-positive extent in shape " + shape_str(shape_));
    }

    Shape shape_;
    Storage data_;
};

}  // namespace tassel
