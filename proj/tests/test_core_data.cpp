#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lgan/image.hpp"
#include "lgan/manifest.hpp"
#include "lgan/png_io.hpp"
#include "support/oracles.hpp"

using namespace lgan;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lgan_core_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("normalize_image maps the bit range onto [0,1]") {
    std::vector<std::uint32_t> zeros(4, 0);
    const auto z = normalize_image(zeros, 2, 2, 8);
    for (double v : z.values()) CHECK(v == 0.0);

    std::vector<std::uint32_t> raw{255, 128, 0, 1};
    const auto img = normalize_image(raw, 2, 2, 8);
    CHECK(img(0, 0) == 1.0);
    CHECK(img(0, 1) == doctest::Approx(0.50196).epsilon(1e-5));
    CHECK(img(0, 1) == 128.0 / 255.0);

    std::vector<std::uint32_t> wide{65535, 0};
    CHECK(normalize_image(wide, 1, 2, 16)(0, 0) == 1.0);

    std::vector<std::uint32_t> bad{256};
    CHECK_THROWS_AS(normalize_image(bad, 1, 1, 8), InvalidPixel);
    CHECK_THROWS_AS(normalize_image(raw, 1, 1, 8), ShapeError);
}

TEST_CASE("GrayImage rejects out-of-range and non-finite values") {
    CHECK_THROWS_AS(GrayImage(1, 1, {1.5}), InvalidPixel);
    CHECK_THROWS_AS(GrayImage(1, 1, {-0.1}), InvalidPixel);
    CHECK_THROWS_AS(GrayImage(1, 1, {std::nan("")}), InvalidPixel);
    CHECK_THROWS_AS(BinaryMask(1, 1, {2}), InvalidPixel);
}

TEST_CASE("ProbMask clamps into the epsilon window") {
    ProbMask p(1, 3, {0.0, 0.5, 1.0});
    CHECK(p(0, 0) == ProbMask::kEps);
    CHECK(p(0, 1) == 0.5);
    CHECK(p(0, 2) == 1.0 - ProbMask::kEps);
}

TEST_CASE("binarize is inclusive at the threshold") {
    CHECK(binarize(ProbMask(2, 2, std::vector<double>(4, 0.9))).count() == 4);
    CHECK(binarize(ProbMask(2, 2, std::vector<double>(4, 0.1))).count() == 0);
    const auto m = binarize(ProbMask(1, 3, {0.49, 0.50, 0.51}), 0.5);
    CHECK(m(0, 0) == 0);
    CHECK(m(0, 1) == 1);
    CHECK(m(0, 2) == 1);
}

TEST_CASE("resize contracts") {
    Rng rng(3);
    std::vector<double> v(224 * 224);
    for (double& x : v) x = rng.uniform();
    const GrayImage img(224, 224, v);
    CHECK(resize(img, 224, 16) == img);

    const auto c = resize(GrayImage::constant(20, 30, 0.37), 64, 4);
    CHECK(c.height() == 64);
    for (double x : c.values()) CHECK(x == doctest::Approx(0.37).epsilon(1e-12));

    const BinaryMask small(2, 2, {1, 1, 0, 0});
    const auto up = resample_nearest(small, 4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) CHECK(up(y, x) == (y < 2 ? 1 : 0));
    }
    CHECK(resize(small, 8)(0, 0) == 1);

    CHECK_THROWS_AS(resize(img, 100, 16), ShapeError);
    CHECK_THROWS_AS(resize(img, 4), ShapeError);
}

TEST_CASE("tensor packing round trip") {
    std::vector<GrayImage> imgs{GrayImage::constant(4, 4, 0.25), GrayImage::constant(4, 4, 0.75)};
    const Tensor t = to_tensor(imgs);
    CHECK(t.shape() == Shape{2, 1, 4, 4});
    CHECK(t.at(1, 0, 3, 3) == 0.75);
    const ProbMask p = prob_from_tensor(t, 0);
    CHECK(p(2, 2) == 0.25);
}

TEST_CASE("PNG round trip") {
    const auto dir = scratch("png");
    std::vector<double> v(6 * 5);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i * 8) / 255.0;
    const GrayImage img(6, 5, v);
    save_gray_png(dir / "img.png", img);
    const auto back = load_gray_png(dir / "img.png");
    CHECK(back.height() == 6);
    CHECK(back.width() == 5);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(back.values()[i] == doctest::Approx(v[i]).epsilon(1e-12));

    const BinaryMask m(2, 3, {1, 0, 1, 0, 0, 1});
    save_mask_png(dir / "m.png", m);
    CHECK(load_mask_png(dir / "m.png") == m);
    CHECK_FALSE(fs::exists(dir / "m.png.tmp"));

    CHECK_THROWS_AS(load_gray_png(dir / "absent.png"), IOError);
    write_text(dir / "junk.png", "not a png");
    CHECK_THROWS_AS(load_gray_png(dir / "junk.png"), IOError);
}

TEST_CASE("manifest parsing") {
    const auto dir = scratch("manifest");
    fs::create_directories(dir / "d");
    save_gray_png(dir / "d/a.png", GrayImage::constant(8, 8, 0.5));
    save_mask_png(dir / "d/am.png", BinaryMask::zeros(8, 8));
    save_gray_png(dir / "d/b.png", GrayImage::constant(8, 8, 0.2));
    save_mask_png(dir / "d/bm.png", BinaryMask::zeros(8, 8));

    write_text(dir / "empty.tsv", "");
    CHECK_THROWS_AS(load_manifest(dir / "empty.tsv"), EmptyManifest);

    write_text(dir / "two.tsv", "# header\nd/b.png\td/bm.png\ts1\t1\ttrain\n\nd/a.png\td/am.png\ts2\t0\ttest\n");
    const auto m = load_manifest(dir / "two.tsv");
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].scan_id == "s1");
    CHECK(m.entries[0].slice_index == 1);
    CHECK(m.entries[1].split == Split::Test);
    CHECK(m.count(Split::Train) == 1);

    write_text(dir / "missing.tsv", "d/a.png\td/nope.png\ts1\t0\ttrain\n");
    try {
        load_manifest(dir / "missing.tsv");
        FAIL("expected MissingFile");
    } catch (const MissingFile& e) {
        CHECK(std::string(e.what()).find("nope.png") != std::string::npos);
    }

    write_text(dir / "bad.tsv", "d/a.png\td/am.png\ts1\t0\ttrain\nd/a.png\td/am.png\ts1\n");
    try {
        load_manifest(dir / "bad.tsv");
        FAIL("expected ManifestError");
    } catch (const ManifestError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    write_text(dir / "leak.tsv", "d/a.png\td/am.png\ts1\t0\ttrain\nd/b.png\td/bm.png\ts1\t1\ttest\n");
    CHECK_THROWS_AS(load_manifest(dir / "leak.tsv"), ManifestError);

    CHECK_THROWS_AS(load_manifest(dir / "absent.tsv"), ManifestError);

    write_manifest(dir / "copy.tsv", m);
    CHECK(load_manifest(dir / "copy.tsv").entries == m.entries);
}

TEST_CASE("load_slices and group_scans") {
    const auto dir = scratch("slices");
    DatasetManifest m;
    for (int i = 0; i < 4; ++i) {
        const auto img = dir / ("i" + std::to_string(i) + ".png");
        const auto msk = dir / ("m" + std::to_string(i) + ".png");
        save_gray_png(img, GrayImage::constant(12, 12, 0.1 * i));
        save_mask_png(msk, BinaryMask(12, 12, std::vector<std::uint8_t>(144, i % 2)));
        m.entries.push_back({img, msk, i < 2 ? "a" : "b", 1 - i % 2, Split::Train});
    }
    const auto slices = load_slices(m, Split::Train, 8);
    REQUIRE(slices.size() == 4);
    CHECK(slices[0].image.height() == 8);
    CHECK(slices[1].mask.count() == 64);
    const auto scans = group_scans(slices);
    REQUIRE(scans.size() == 2);
    CHECK(scans[0].scan_id == "a");
    CHECK(scans[0].slices[0].slice_index == 0);
    CHECK(scans[0].slices[1].slice_index == 1);
}
