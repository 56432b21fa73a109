#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lgan/image.hpp"
#include "lgan/manifest.hpp"
#include "lgan/rng.hpp"

namespace lgan::phantom {

struct Intensities {
    double background = 0.05;
    double body = 0.7;
    double lung = 0.2;
};

struct PhantomConfig {
    std::uint64_t seed = 0;
    int count = 100;
    int size = 64;
    double noise_sigma = 0.05;
    int min_blobs = 1;
    int max_blobs = 2;
    int slices_per_scan = 10;
    // Fraction of scans (rounded to nearest, at least one when there are two
    // or more scans) assigned to the test split. The trailing scans are used.
    double test_fraction = 0.2;
    Intensities intensities{};

    void validate() const;
};

// One rotated ellipse: centre (cx, cy) in pixel coordinates, semi-axes a, b.
struct Ellipse {
    double cx = 0;
    double cy = 0;
    double a = 1;
    double b = 1;
    double angle = 0;

    // Interior predicate evaluated at pixel centre (x, y).
    [[nodiscard]] bool contains(double x, double y) const;
};

struct PhantomSlice {
    GrayImage image;
    BinaryMask mask;
    std::vector<Ellipse> lungs;
};

inline constexpr double kMinForeground = 0.02;
inline constexpr double kMaxForeground = 0.45;

// Draws one slice; resamples the lung layout until the foreground fraction
// lies in [kMinForeground, kMaxForeground].
PhantomSlice render_slice(const PhantomConfig& cfg, Rng& rng);

// In-memory generation of the full set, in manifest order.
std::vector<PhantomSlice> generate_slices(const PhantomConfig& cfg);

// Writes images/NNNNN.png, masks/NNNNN.png and manifest.tsv under out_dir.
DatasetManifest generate(const PhantomConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace lgan::phantom
