#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lgan/phantom.hpp"
#include "lgan/png_io.hpp"
#include "support/oracles.hpp"

using namespace lgan;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("ellipse predicate agrees with the quadratic form") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        phantom::Ellipse e{rng.uniform(0, 32), rng.uniform(0, 32), rng.uniform(2, 10), rng.uniform(2, 10),
                           rng.uniform(0, 3.14159)};
        for (int k = 0; k < 20; ++k) {
            const double x = rng.uniform(0, 32);
            const double y = rng.uniform(0, 32);
            CHECK(e.contains(x, y) == oracle::ellipse_quadratic_form(x, y, e.cx, e.cy, e.a, e.b, e.angle));
        }
    }
}

TEST_CASE("rendered slices: mask matches lung ellipses and foreground bounds") {
    phantom::PhantomConfig cfg;
    cfg.size = 64;
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        const auto s = phantom::render_slice(cfg, rng);
        CHECK(s.image.height() == 64);
        CHECK(s.mask.height() == 64);
        CHECK(s.lungs.size() >= 1);
        CHECK(s.lungs.size() <= 2);
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                bool inside = false;
                for (const auto& e : s.lungs) inside = inside || e.contains(x, y);
                CHECK(s.mask(y, x) == (inside ? 1 : 0));
            }
        }
        const double frac = static_cast<double>(s.mask.count()) / (64.0 * 64.0);
        CHECK(frac >= phantom::kMinForeground);
        CHECK(frac <= phantom::kMaxForeground);
    }
}

TEST_CASE("noise-free slices are piecewise constant") {
    phantom::PhantomConfig cfg;
    cfg.noise_sigma = 0.0;
    cfg.count = 5;
    const auto slices = phantom::generate_slices(cfg);
    const auto& in = cfg.intensities;
    for (const auto& s : slices) {
        std::set<double> levels(s.image.values().begin(), s.image.values().end());
        CHECK(levels.size() <= 3);
        for (int y = 0; y < cfg.size; ++y) {
            for (int x = 0; x < cfg.size; ++x) {
                if (s.mask(y, x)) CHECK(s.image(y, x) == in.lung);
            }
        }
        CHECK(levels.count(in.body) == 1);
    }
}

TEST_CASE("generate is deterministic and splits by scan") {
    const fs::path root = fs::temp_directory_path() / "lgan_phantom";
    fs::remove_all(root);
    phantom::PhantomConfig cfg;
    cfg.seed = 7;
    cfg.count = 10;
    cfg.slices_per_scan = 5;
    cfg.size = 32;
    const auto a = phantom::generate(cfg, root / "a");
    const auto b = phantom::generate(cfg, root / "b");
    CHECK(slurp(root / "a/manifest.tsv") == slurp(root / "b/manifest.tsv"));
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(slurp(a.entries[i].image_path) == slurp(b.entries[i].image_path));
        CHECK(slurp(a.entries[i].mask_path) == slurp(b.entries[i].mask_path));
    }
    std::set<std::string> scans;
    for (const auto& e : a.entries) scans.insert(e.scan_id);
    CHECK(scans.size() == 2);
    CHECK(a.count(Split::Train) == 5);
    CHECK(a.count(Split::Test) == 5);
    CHECK_NOTHROW(check_scan_partition(a));
    CHECK(load_manifest(root / "a/manifest.tsv").entries.size() == 10);

    cfg.seed = 8;
    const auto c = phantom::generate(cfg, root / "c");
    CHECK(slurp(c.entries[0].image_path) != slurp(a.entries[0].image_path));
}

TEST_CASE("acceptance-sized phantom split") {
    phantom::PhantomConfig cfg;
    cfg.count = 250;
    const auto slices = phantom::generate_slices(cfg);
    CHECK(slices.size() == 250);
    // 25 scans, 5 of them held out.
    const fs::path root = fs::temp_directory_path() / "lgan_phantom_250";
    fs::remove_all(root);
    cfg.size = 32;
    const auto m = phantom::generate(cfg, root);
    CHECK(m.count(Split::Train) == 200);
    CHECK(m.count(Split::Test) == 50);
}

TEST_CASE("invalid configs are rejected") {
    phantom::PhantomConfig cfg;
    cfg.count = 0;
    CHECK_THROWS_AS(cfg.validate(), SpecError);
    cfg = {};
    cfg.size = 4;
    CHECK_THROWS_AS(cfg.validate(), SpecError);
    cfg = {};
    cfg.noise_sigma = -1;
    CHECK_THROWS_AS(cfg.validate(), SpecError);
    cfg = {};
    cfg.min_blobs = 3;
    CHECK_THROWS(cfg.validate());
}
