#include <doctest.h>

#include <cmath>

#include "lgan/metrics.hpp"
#include "lgan/report.hpp"
#include "support/oracles.hpp"

using namespace lgan;
using namespace lgan::metrics;
using oracle::mask_from_pixels;

TEST_CASE("iou and dice worked examples") {
    const auto x = mask_from_pixels(2, 2, {{0, 0}, {0, 1}});
    const auto y = mask_from_pixels(2, 2, {{0, 1}, {1, 1}});
    CHECK(iou(x, y) == 1.0 / 3.0);
    CHECK(dice(x, y) == 0.5);
    CHECK(iou(x, x) == 1.0);
    CHECK(dice(x, x) == 1.0);
    const auto z = mask_from_pixels(2, 2, {{1, 0}});
    CHECK(iou(x, z) == 0.0);
    CHECK(dice(x, z) == 0.0);
    CHECK(iou(BinaryMask::zeros(2, 2), BinaryMask::zeros(2, 2)) == 1.0);
    CHECK(dice(BinaryMask::zeros(2, 2), BinaryMask::zeros(2, 2)) == 1.0);
    CHECK_THROWS_AS(iou(x, BinaryMask::zeros(3, 2)), ShapeError);
}

TEST_CASE("dice_3d pools voxels") {
    const auto a = mask_from_pixels(2, 2, {{0, 0}, {0, 1}});
    const auto b = mask_from_pixels(2, 2, {{1, 0}, {1, 1}});
    const std::vector<BinaryMask> pred{a, a};
    const std::vector<BinaryMask> truth{a, b};
    CHECK(dice_3d(pred, truth) == 0.5);
    CHECK(dice_3d(truth, truth) == 1.0);
    const std::vector<BinaryMask> empty{BinaryMask::zeros(2, 2), BinaryMask::zeros(2, 2)};
    CHECK(dice_3d(empty, truth) == 0.0);
}

TEST_CASE("hausdorff worked examples") {
    const auto m = mask_from_pixels(5, 5, {{0, 0}});
    const auto g = mask_from_pixels(5, 5, {{3, 4}});
    CHECK(hausdorff(m, g) == 5.0);
    CHECK(hausdorff(m, m) == 0.0);
    const auto m2 = mask_from_pixels(5, 5, {{0, 0}, {0, 3}});
    CHECK(hausdorff(m2, m) == 3.0);
    CHECK_THROWS_AS(hausdorff(m, BinaryMask::zeros(5, 5)), EmptyMask);
}

TEST_CASE("metrics agree with the brute-force oracles") {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const int h = 5 + static_cast<int>(rng.below(20));
        const int w = 5 + static_cast<int>(rng.below(20));
        const auto x = trial % 2 ? oracle::random_mask(rng, h, w, rng.uniform(0.01, 0.5))
                                 : oracle::random_blob_mask(rng, h, w);
        const auto y = oracle::random_mask(rng, h, w, rng.uniform(0.01, 0.5));
        const auto [inter, uni] = oracle::set_counts(x, y);
        if (uni > 0) CHECK(iou(x, y) == static_cast<double>(inter) / static_cast<double>(uni));
        if (!x.empty() && !y.empty()) CHECK(std::abs(hausdorff(x, y) - oracle::brute_hausdorff(x, y)) <= 1e-9);
    }
}

TEST_CASE("distance transform") {
    const auto m = mask_from_pixels(3, 4, {{1, 1}});
    const auto d = squared_distance_transform(m);
    CHECK(d[0] == 2.0);
    CHECK(d[1 * 4 + 3] == 4.0);
    for (double v : squared_distance_transform(BinaryMask::zeros(2, 2))) CHECK(std::isinf(v));
}

TEST_CASE("summaries and aggregation") {
    CHECK(summarize({0.5}).mean == 0.5);
    CHECK(summarize({0.5}).median == 0.5);
    CHECK(summarize({0, 1}).median == 0.5);
    const auto s = summarize({4, 1, 2});
    CHECK(s.mean == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
    CHECK(s.median == 2.0);
    CHECK_THROWS_AS(summarize({}), EmptyReport);
    CHECK_THROWS_AS(aggregate("m", {}), EmptyReport);

    std::vector<SliceMetrics> rows{{"a", 0, 1.0, 1.0, 0.0}, {"a", 1, 0.5, 0.6, std::nullopt}, {"b", 0, 0.0, 0.0, 4.0}};
    const auto r = aggregate("m", rows, {{"a", 0.9}, {"b", 0.7}});
    CHECK(r.iou.mean == 0.5);
    CHECK(r.hausdorff_flagged == 1);
    REQUIRE(r.hausdorff.has_value());
    CHECK(r.hausdorff->count == 2);
    CHECK(r.hausdorff->mean == 2.0);
    REQUIRE(r.dice_3d.has_value());
    CHECK(r.dice_3d->mean == doctest::Approx(0.8));

    const auto flagged = aggregate("m", {{"a", 0, 0.0, 0.0, std::nullopt}});
    CHECK_FALSE(flagged.hausdorff.has_value());
}

TEST_CASE("evaluate_slice flags empty masks") {
    const auto g = mask_from_pixels(4, 4, {{1, 1}});
    const auto row = evaluate_slice("s", 3, BinaryMask::zeros(4, 4), g);
    CHECK(row.iou == 0.0);
    CHECK_FALSE(row.hausdorff.has_value());
    const auto ok = evaluate_slice("s", 3, g, g);
    CHECK(ok.iou == 1.0);
    CHECK(ok.hausdorff == 0.0);
}

TEST_CASE("report round trip and tables") {
    std::vector<SliceMetrics> rows{{"a", 0, 1.0 / 3.0, 0.5, 1.0 / 7.0}, {"b", 2, 0.25, 0.4, std::nullopt}};
    const auto r = aggregate("LGAN_Basic", rows, {{"a", 2.0 / 3.0}, {"b", 0.1}});
    const auto back = report::from_tsv(report::to_tsv(r));
    CHECK(back.model == r.model);
    CHECK(back.iou.mean == r.iou.mean);
    CHECK(back.per_slice[0].hausdorff == r.per_slice[0].hausdorff);
    CHECK(back.per_scan_dice_3d[0].dice_3d == 2.0 / 3.0);
    CHECK(back.hausdorff_flagged == 1);

    auto other = r;
    other.model = "Benchmark";
    const auto table = report::comparison_table({r, other});
    CHECK(table.find("Mean") != std::string::npos);
    CHECK(table.find("Median") != std::string::npos);
    CHECK(table.find("IOU") != std::string::npos);
    CHECK(table.find("Hausdorff") != std::string::npos);
    CHECK(table.find("LGAN_Basic") < table.find("Benchmark"));
    CHECK(report::dice_3d_table({r}).find("LGAN_Basic") != std::string::npos);
    CHECK_THROWS_AS(report::from_tsv("garbage\n"), UserError);
}
