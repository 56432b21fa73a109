#include "lgan/image.hpp"

#include <algorithm>
#include <cmath>

namespace lgan {

GrayImage::GrayImage(int height, int width, std::vector<double> values)
    : Raster(height, width, std::move(values)) {
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw InvalidPixel("gray intensity " + std::to_string(v) + " outside [0,1]");
        }
    }
}

GrayImage GrayImage::constant(int height, int width, double v) {
    return GrayImage(height, width, std::vector<double>(static_cast<std::size_t>(height) * width, v));
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> values)
    : Raster(height, width, std::move(values)) {
    for (auto v : values_) {
        if (v > 1) throw InvalidPixel("mask label " + std::to_string(v) + " is not 0 or 1");
    }
}

BinaryMask BinaryMask::zeros(int height, int width) {
    return BinaryMask(height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width, 0));
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

ProbMask::ProbMask(int height, int width, std::vector<double> values)
    : Raster(height, width, std::move(values)) {
    for (double& v : values_) {
        if (!std::isfinite(v)) throw InvalidPixel("probability is not finite");
        v = std::clamp(v, kEps, 1.0 - kEps);
    }
}

GrayImage normalize_image(std::span<const std::uint32_t> raw, int height, int width, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) {
        throw InvalidPixel("unsupported bit depth " + std::to_string(bit_depth));
    }
    if (raw.size() != static_cast<std::size_t>(height) * width) {
        throw ShapeError("raw pixel count does not match image dimensions");
    }
    const std::uint32_t max_value = (1u << bit_depth) - 1u;
    std::vector<double> values(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] > max_value) {
            throw InvalidPixel("pixel value " + std::to_string(raw[i]) + " exceeds " +
                               std::to_string(bit_depth) + "-bit range");
        }
        values[i] = static_cast<double>(raw[i]) / max_value;
    }
    return GrayImage(height, width, std::move(values));
}

BinaryMask binarize(const ProbMask& p, double threshold) {
    std::vector<std::uint8_t> out(p.size());
    auto v = p.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] >= threshold ? 1 : 0;
    return BinaryMask(p.height(), p.width(), std::move(out));
}

namespace {

void check_network_size(int size, int divisor) {
    if (size < 8) throw ShapeError("resize target " + std::to_string(size) + " is below 8 pixels");
    if (divisor < 1 || size % divisor != 0) {
        throw ShapeError("resize target " + std::to_string(size) + " is not divisible by " +
                         std::to_string(divisor));
    }
}

// Half-pixel-centre source coordinate for destination index `d`.
double source_coord(int d, int src_len, int dst_len) {
    return (d + 0.5) * static_cast<double>(src_len) / dst_len - 0.5;
}

}  // namespace

GrayImage resample_bilinear(const GrayImage& img, int height, int width) {
    if (img.same_shape(height, width)) return img;
    std::vector<double> out(static_cast<std::size_t>(height) * width);
    const int sh = img.height();
    const int sw = img.width();
    for (int y = 0; y < height; ++y) {
        const double sy = std::clamp(source_coord(y, sh, height), 0.0, sh - 1.0);
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, sh - 1);
        const double fy = sy - y0;
        for (int x = 0; x < width; ++x) {
            const double sx = std::clamp(source_coord(x, sw, width), 0.0, sw - 1.0);
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, sw - 1);
            const double fx = sx - x0;
            const double top = img(y0, x0) * (1 - fx) + img(y0, x1) * fx;
            const double bottom = img(y1, x0) * (1 - fx) + img(y1, x1) * fx;
            out[static_cast<std::size_t>(y) * width + x] = std::clamp(top * (1 - fy) + bottom * fy, 0.0, 1.0);
        }
    }
    return GrayImage(height, width, std::move(out));
}

BinaryMask resample_nearest(const BinaryMask& mask, int height, int width) {
    if (mask.same_shape(height, width)) return mask;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(height) * width);
    for (int y = 0; y < height; ++y) {
        const int sy = std::min(static_cast<int>((y + 0.5) * mask.height() / height), mask.height() - 1);
        for (int x = 0; x < width; ++x) {
            const int sx = std::min(static_cast<int>((x + 0.5) * mask.width() / width), mask.width() - 1);
            out[static_cast<std::size_t>(y) * width + x] = mask(sy, sx);
        }
    }
    return BinaryMask(height, width, std::move(out));
}

GrayImage resize(const GrayImage& img, int size, int divisor) {
    check_network_size(size, divisor);
    return resample_bilinear(img, size, size);
}

BinaryMask resize(const BinaryMask& mask, int size, int divisor) {
    check_network_size(size, divisor);
    return resample_nearest(mask, size, size);
}

namespace {

template <class R>
Tensor pack(std::span<const R> rasters) {
    if (rasters.empty()) throw ShapeError("cannot pack an empty batch");
    const int h = rasters.front().height();
    const int w = rasters.front().width();
    Tensor t({static_cast<int>(rasters.size()), 1, h, w});
    for (std::size_t n = 0; n < rasters.size(); ++n) {
        if (!rasters[n].same_shape(h, w)) throw ShapeError("batch members differ in shape");
        auto v = rasters[n].values();
        std::copy(v.begin(), v.end(), t.sample(static_cast<int>(n)));
    }
    return t;
}

}  // namespace

Tensor to_tensor(std::span<const GrayImage> images) { return pack(images); }
Tensor to_tensor(std::span<const BinaryMask> masks) { return pack(masks); }
Tensor to_tensor(std::span<const ProbMask> masks) { return pack(masks); }

ProbMask prob_from_tensor(const Tensor& t, int n) {
    if (t.c() != 1) throw ShapeError("probability tensor must have one channel");
    const double* p = t.sample(n);
    return ProbMask(t.h(), t.w(), std::vector<double>(p, p + t.shape().plane()));
}

}  // namespace lgan
