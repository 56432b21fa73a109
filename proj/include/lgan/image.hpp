#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lgan/tensor.hpp"

namespace lgan {

// Row-major single-channel raster. The concrete image types below add
// their value-domain invariants on top of it.
template <class T>
class Raster {
public:
    Raster() = default;
    Raster(int height, int width, std::vector<T> values)
        : height_(height), width_(width), values_(std::move(values)) {
        if (height_ <= 0 || width_ <= 0) {
            throw ShapeError("raster dimensions must be positive");
        }
        if (values_.size() != static_cast<std::size_t>(height_) * width_) {
            throw ShapeError("raster value count does not match " + std::to_string(height_) + "x" +
                             std::to_string(width_));
        }
    }

    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] std::span<const T> values() const { return values_; }
    [[nodiscard]] T operator()(int y, int x) const {
        return values_[static_cast<std::size_t>(y) * width_ + x];
    }
    [[nodiscard]] bool same_shape(int h, int w) const { return h == height_ && w == width_; }
    template <class U>
    [[nodiscard]] bool same_shape(const Raster<U>& o) const {
        return o.height() == height_ && o.width() == width_;
    }

    bool operator==(const Raster&) const = default;

protected:
    int height_ = 0;
    int width_ = 0;
    std::vector<T> values_;
};

// CT slice surrogate: finite intensities in [0, 1].
class GrayImage : public Raster<double> {
public:
    GrayImage() = default;
    GrayImage(int height, int width, std::vector<double> values);
    static GrayImage constant(int height, int width, double v);
};

// Hard per-pixel lung labels, exactly 0 or 1.
class BinaryMask : public Raster<std::uint8_t> {
public:
    BinaryMask() = default;
    BinaryMask(int height, int width, std::vector<std::uint8_t> values);
    static BinaryMask zeros(int height, int width);
    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] bool empty() const { return count() == 0; }
};

// Soft generator output, clamped into [eps, 1 - eps].
class ProbMask : public Raster<double> {
public:
    static constexpr double kEps = 1e-7;

    ProbMask() = default;
    // Values are clamped, so any finite input is accepted.
    ProbMask(int height, int width, std::vector<double> values);
};

inline constexpr double kDefaultThreshold = 0.5;

GrayImage normalize_image(std::span<const std::uint32_t> raw, int height, int width, int bit_depth);

// p >= threshold maps to 1.
BinaryMask binarize(const ProbMask& p, double threshold = kDefaultThreshold);

// Square resize used when feeding networks: `size` must be >= 8 and a
// multiple of `divisor` (2^depth of the consuming network).
GrayImage resize(const GrayImage& img, int size, int divisor = 1);
BinaryMask resize(const BinaryMask& mask, int size, int divisor = 1);

// Unconstrained resampling, used to map predictions back to source geometry.
GrayImage resample_bilinear(const GrayImage& img, int height, int width);
BinaryMask resample_nearest(const BinaryMask& mask, int height, int width);

// Batch packing: N single-channel rasters into an {N,1,H,W} tensor.
Tensor to_tensor(std::span<const GrayImage> images);
Tensor to_tensor(std::span<const BinaryMask> masks);
Tensor to_tensor(std::span<const ProbMask> masks);
ProbMask prob_from_tensor(const Tensor& t, int n);

}  // namespace lgan
