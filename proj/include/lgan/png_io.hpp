#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lgan/image.hpp"

namespace lgan {

struct RawImage {
    int height = 0;
    int width = 0;
    int bit_depth = 8;
    std::vector<std::uint32_t> pixels;
};

// Reads an 8- or 16-bit grayscale PNG. Palette and colour images are
// converted to grayscale by libpng; alpha is stripped.
RawImage read_png(const std::filesystem::path& path);

GrayImage load_gray_png(const std::filesystem::path& path);
// Mask pixels >= 128 (8-bit scale) are foreground.
BinaryMask load_mask_png(const std::filesystem::path& path);

// 8-bit grayscale writers. Files are written to a sibling temp file and
// renamed into place, so readers never observe a partial PNG.
void write_png(const std::filesystem::path& path, int height, int width, const std::vector<std::uint8_t>& pixels);
void save_gray_png(const std::filesystem::path& path, const GrayImage& img);
void save_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace lgan
