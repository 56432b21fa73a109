#pragma once

#include <algorithm>
#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "lgan/error.hpp"

namespace lgan {

// Dense NCHW array of doubles. Parameters use the same container with
// whatever leading dimensions they need (e.g. a bias is {C, 1, 1, 1}).
struct Shape {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    [[nodiscard]] std::size_t size() const {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    [[nodiscard]] std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
    bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

// Every buffer starts on a 64-byte boundary. Vectorised kernels choose their
// peeling from the address, so a fixed alignment keeps results bit-identical
// from run to run.
template <class T, std::size_t Align = 64>
struct AlignedAllocator {
    using value_type = T;
    template <class U>
    struct rebind {
        using other = AlignedAllocator<U, Align>;
    };

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U, Align>&) {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(Align))); }
    void deallocate(T* p, std::size_t) { ::operator delete(p, std::align_val_t(Align)); }

    template <class U>
    bool operator==(const AlignedAllocator<U, Align>&) const {
        return true;
    }
};

using Storage = std::vector<double, AlignedAllocator<double>>;

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0) : shape_(shape), data_(shape.size(), fill) {}
    Tensor(Shape shape, const std::vector<double>& data) : shape_(shape), data_(data.begin(), data.end()) {
        check_size();
    }
    Tensor(Shape shape, Storage data) : shape_(shape), data_(std::move(data)) { check_size(); }

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] int n() const { return shape_.n; }
    [[nodiscard]] int c() const { return shape_.c; }
    [[nodiscard]] int h() const { return shape_.h; }
    [[nodiscard]] int w() const { return shape_.w; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    [[nodiscard]] double* data() { return data_.data(); }
    [[nodiscard]] const double* data() const { return data_.data(); }
    [[nodiscard]] std::span<double> values() { return data_; }
    [[nodiscard]] std::span<const double> values() const { return data_; }
    [[nodiscard]] Storage& storage() { return data_; }
    [[nodiscard]] const Storage& storage() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
    [[nodiscard]] double at(int n, int c, int y, int x) const { return data_[offset(n, c, y, x)]; }

    // Pointer to the first element of sample n (all channels).
    double* sample(int n) { return data_.data() + static_cast<std::size_t>(n) * shape_.c * shape_.plane(); }
    [[nodiscard]] const double* sample(int n) const {
        return data_.data() + static_cast<std::size_t>(n) * shape_.c * shape_.plane();
    }
    double* channel(int n, int c) { return sample(n) + static_cast<std::size_t>(c) * shape_.plane(); }
    [[nodiscard]] const double* channel(int n, int c) const {
        return sample(n) + static_cast<std::size_t>(c) * shape_.plane();
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Tensor&) const = default;

private:
    void check_size() const {
        if (data_.size() != shape_.size()) {
            throw ShapeError("tensor data size " + std::to_string(data_.size()) + " does not match shape " +
                             to_string(shape_));
        }
    }

    [[nodiscard]] std::size_t offset(int n, int c, int y, int x) const {
        return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
    }

    Shape shape_{};
    Storage data_;
};

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

// Elementwise helpers used by the loss and critic wiring code.
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor concat_channels(const Tensor& a, const Tensor& b);
// Inverse of concat_channels for gradients: first `c_first` channels go to `first`.
void split_channels(const Tensor& joined, int c_first, Tensor& first, Tensor& second);
void add_inplace(Tensor& dst, const Tensor& src);
void scale_inplace(Tensor& dst, double s);

}  // namespace lgan
