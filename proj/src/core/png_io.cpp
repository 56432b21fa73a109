#include "lgan/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <system_error>

namespace lgan {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    *err = msg;
    png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

}  // namespace

RawImage read_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IOError("cannot open " + path.string());

    std::string error;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IOError("libpng initialisation failed");
    }

    RawImage out;
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IOError("failed to decode " + path.string() + ": " + error);
    }
    png_init_io(png, file.get());
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color & PNG_COLOR_MASK_COLOR || color == PNG_COLOR_TYPE_PALETTE) {
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    if (depth == 16) png_set_swap(png);  // native little-endian 16-bit samples
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    depth = png_get_bit_depth(png, info);
    out.bit_depth = depth == 16 ? 16 : 8;
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * out.height);
    rows.resize(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + row_bytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    out.pixels.resize(static_cast<std::size_t>(out.height) * out.width);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            std::uint32_t v;
            if (out.bit_depth == 16) {
                std::uint16_t s;
                std::memcpy(&s, rows[y] + 2 * x, 2);
                v = s;
            } else {
                v = rows[y][x];
            }
            out.pixels[static_cast<std::size_t>(y) * out.width + x] = v;
        }
    }
    return out;
}

GrayImage load_gray_png(const std::filesystem::path& path) {
    RawImage raw = read_png(path);
    return normalize_image(raw.pixels, raw.height, raw.width, raw.bit_depth);
}

BinaryMask load_mask_png(const std::filesystem::path& path) {
    RawImage raw = read_png(path);
    const std::uint32_t half = raw.bit_depth == 16 ? 32768u : 128u;
    std::vector<std::uint8_t> labels(raw.pixels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = raw.pixels[i] >= half ? 1 : 0;
    return BinaryMask(raw.height, raw.width, std::move(labels));
}

void write_png(const std::filesystem::path& path, int height, int width, const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != static_cast<std::size_t>(height) * width) {
        throw ShapeError("png pixel buffer does not match dimensions");
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        FilePtr file(std::fopen(tmp.c_str(), "wb"));
        if (!file) throw IOError("cannot write " + path.string());

        std::string error;
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            png_destroy_write_struct(&png, &info);
            throw IOError("libpng initialisation failed");
        }
        std::vector<png_bytep> rows(height);
        for (int y = 0; y < height; ++y) {
            rows[y] = const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width);
        }
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            throw IOError("failed to encode " + path.string() + ": " + error);
        }
        png_init_io(png, file.get());
        png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        png_write_image(png, rows.data());
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        if (std::fflush(file.get()) != 0) throw IOError("cannot flush " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IOError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void save_gray_png(const std::filesystem::path& path, const GrayImage& img) {
    std::vector<std::uint8_t> px(img.size());
    auto v = img.values();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(std::lround(v[i] * 255.0));
    write_png(path, img.height(), img.width(), px);
}

void save_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> px(mask.size());
    auto v = mask.values();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = v[i] ? 255 : 0;
    write_png(path, mask.height(), mask.width(), px);
}

}  // namespace lgan
