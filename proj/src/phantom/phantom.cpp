#include "lgan/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "lgan/png_io.hpp"

namespace lgan::phantom {

void PhantomConfig::validate() const {
    if (count < 1) throw SpecError("phantom count must be >= 1");
    if (size < 32) throw SpecError("phantom size must be >= 32");
    if (!(noise_sigma >= 0.0 && noise_sigma <= 0.5)) throw SpecError("noise_sigma must lie in [0, 0.5]");
    if (min_blobs < 1 || max_blobs < min_blobs) throw SpecError("invalid blob count range");
    if (slices_per_scan < 1) throw SpecError("slices_per_scan must be >= 1");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw SpecError("test_fraction must lie in [0, 1)");
}

bool Ellipse::contains(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double u = (dx * c + dy * s) / a;
    const double v = (-dx * s + dy * c) / b;
    return u * u + v * v <= 1.0;
}

namespace {

std::vector<Ellipse> draw_lungs(const PhantomConfig& cfg, Rng& rng) {
    const double size = cfg.size;
    const int blobs = cfg.min_blobs + static_cast<int>(rng.below(cfg.max_blobs - cfg.min_blobs + 1));
    std::vector<Ellipse> lungs;
    for (int i = 0; i < blobs; ++i) {
        Ellipse e;
        // With two or more lobes, alternate between the left and right half.
        double lo = size / 4;
        double hi = 3 * size / 4;
        if (blobs > 1) {
            lo = (i % 2 == 0) ? size / 4 : size / 2;
            hi = (i % 2 == 0) ? size / 2 : 3 * size / 4;
        }
        e.cx = rng.uniform(lo, hi);
        e.cy = rng.uniform(size / 4, 3 * size / 4);
        e.a = rng.uniform(size / 8, size / 3);
        e.b = rng.uniform(size / 8, size / 3);
        e.angle = rng.uniform(0.0, std::numbers::pi);
        lungs.push_back(e);
    }
    return lungs;
}

}  // namespace

PhantomSlice render_slice(const PhantomConfig& cfg, Rng& rng) {
    const int n = cfg.size;
    const std::size_t pixels = static_cast<std::size_t>(n) * n;
    std::vector<Ellipse> lungs;
    std::vector<std::uint8_t> mask(pixels);
    while (true) {
        lungs = draw_lungs(cfg, rng);
        std::size_t fg = 0;
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                bool inside = false;
                for (const auto& e : lungs) inside = inside || e.contains(x, y);
                mask[static_cast<std::size_t>(y) * n + x] = inside ? 1 : 0;
                fg += inside;
            }
        }
        const double fraction = static_cast<double>(fg) / pixels;
        if (fraction >= kMinForeground && fraction <= kMaxForeground) break;
    }

    const double body_cx = n / 2.0 + rng.uniform(-0.03, 0.03) * n;
    const double body_cy = n / 2.0 + rng.uniform(-0.03, 0.03) * n;
    const double body_r = rng.uniform(0.42, 0.48) * n;
    const auto& tone = cfg.intensities;

    std::vector<double> image(pixels);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * n + x;
            const double dx = x - body_cx;
            const double dy = y - body_cy;
            double v = (dx * dx + dy * dy <= body_r * body_r) ? tone.body : tone.background;
            if (mask[i]) v = tone.lung;
            if (cfg.noise_sigma > 0.0) v = std::clamp(v + rng.normal(0.0, cfg.noise_sigma), 0.0, 1.0);
            image[i] = v;
        }
    }
    return PhantomSlice{GrayImage(n, n, std::move(image)), BinaryMask(n, n, std::move(mask)), std::move(lungs)};
}

std::vector<PhantomSlice> generate_slices(const PhantomConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::vector<PhantomSlice> out;
    out.reserve(cfg.count);
    for (int i = 0; i < cfg.count; ++i) out.push_back(render_slice(cfg, rng));
    return out;
}

DatasetManifest generate(const PhantomConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "images", ec);
    if (!ec) std::filesystem::create_directories(out_dir / "masks", ec);
    if (ec) throw IOError("cannot create " + out_dir.string() + ": " + ec.message());

    const int scans = (cfg.count + cfg.slices_per_scan - 1) / cfg.slices_per_scan;
    int test_scans = static_cast<int>(std::lround(cfg.test_fraction * scans));
    if (scans >= 2 && cfg.test_fraction > 0.0) test_scans = std::clamp(test_scans, 1, scans - 1);
    if (scans < 2) test_scans = 0;

    const auto slices = generate_slices(cfg);
    DatasetManifest manifest;
    for (int i = 0; i < cfg.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%05d.png", i);
        char scan[32];
        const int scan_no = i / cfg.slices_per_scan;
        std::snprintf(scan, sizeof scan, "scan%03d", scan_no);
        ManifestEntry e;
        e.image_path = out_dir / "images" / name;
        e.mask_path = out_dir / "masks" / name;
        e.scan_id = scan;
        e.slice_index = i % cfg.slices_per_scan;
        e.split = scan_no >= scans - test_scans ? Split::Test : Split::Train;
        save_gray_png(e.image_path, slices[i].image);
        save_mask_png(e.mask_path, slices[i].mask);
        manifest.entries.push_back(std::move(e));
    }
    write_manifest(out_dir / "manifest.tsv", manifest);
    return manifest;
}

}  // namespace lgan::phantom
