#include "lgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lgan::metrics {

namespace {

struct Counts {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t both = 0;
};

Counts count(const BinaryMask& x, const BinaryMask& y, Counts acc = {}) {
    if (!x.same_shape(y)) {
        throw ShapeError("mask shapes differ: " + std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                         " vs " + std::to_string(y.height()) + "x" + std::to_string(y.width()));
    }
    auto xv = x.values();
    auto yv = y.values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        acc.x += xv[i];
        acc.y += yv[i];
        acc.both += xv[i] & yv[i];
    }
    return acc;
}

double dice_of(const Counts& c) {
    if (c.x + c.y == 0) return 1.0;
    return 2.0 * static_cast<double>(c.both) / static_cast<double>(c.x + c.y);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform of a sampled function (lower envelope of
// parabolas rooted at every finite sample).
void transform_1d(const double* f, int n, double* d, std::vector<int>& v, std::vector<double>& z) {
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        while (k >= 0) {
            const int p = v[k];
            const double s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = k == 0 ? -kInf
                      : ((f[q] + static_cast<double>(q) * q) - (f[v[k - 1]] + static_cast<double>(v[k - 1]) * v[k - 1])) /
                            (2.0 * (q - v[k - 1]));
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(d, d + n, kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double diff = q - v[j];
        d[q] = diff * diff + f[v[j]];
    }
}

double directed(const BinaryMask& from, const std::vector<double>& to_distance) {
    double worst = 0.0;
    auto fv = from.values();
    for (std::size_t i = 0; i < fv.size(); ++i) {
        if (fv[i]) worst = std::max(worst, to_distance[i]);
    }
    return std::sqrt(worst);
}

}  // namespace

double iou(const BinaryMask& x, const BinaryMask& y) {
    const Counts c = count(x, y);
    const std::size_t uni = c.x + c.y - c.both;
    if (uni == 0) return 1.0;
    return static_cast<double>(c.both) / static_cast<double>(uni);
}

double dice(const BinaryMask& x, const BinaryMask& y) { return dice_of(count(x, y)); }

double dice_3d(std::span<const BinaryMask> predicted, std::span<const BinaryMask> truth) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("scan slice counts differ: " + std::to_string(predicted.size()) + " vs " +
                         std::to_string(truth.size()));
    }
    if (predicted.empty()) throw ShapeError("dice_3d of an empty scan");
    Counts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) c = count(predicted[i], truth[i], c);
    return dice_of(c);
}

std::vector<double> squared_distance_transform(const BinaryMask& mask) {
    const int h = mask.height();
    const int w = mask.width();
    const int n = std::max(h, w);
    std::vector<double> grid(static_cast<std::size_t>(h) * w);
    auto mv = mask.values();
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = mv[i] ? 0.0 : kInf;

    std::vector<double> f(n);
    std::vector<double> d(n);
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
        transform_1d(f.data(), h, d.data(), v, z);
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        double* row = grid.data() + static_cast<std::size_t>(y) * w;
        std::copy(row, row + w, f.begin());
        transform_1d(f.data(), w, row, v, z);
    }
    return grid;
}

double hausdorff(const BinaryMask& m, const BinaryMask& g) {
    if (!m.same_shape(g)) throw ShapeError("hausdorff: mask shapes differ");
    if (m.empty() || g.empty()) throw EmptyMask("hausdorff distance is undefined for an empty mask");
    return std::max(directed(m, squared_distance_transform(g)), directed(g, squared_distance_transform(m)));
}

Summary summarize(std::vector<double> values) {
    if (values.empty()) throw EmptyReport("cannot summarise zero values");
    Summary s;
    s.count = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return s;
}

MetricReport aggregate(std::string model, std::vector<SliceMetrics> rows, std::vector<ScanDice> scans) {
    if (rows.empty()) throw EmptyReport("metric report has no rows");
    MetricReport r;
    r.model = std::move(model);
    std::vector<double> ious;
    std::vector<double> dices;
    std::vector<double> hds;
    for (const auto& row : rows) {
        ious.push_back(row.iou);
        dices.push_back(row.dice);
        if (row.hausdorff) {
            hds.push_back(*row.hausdorff);
        } else {
            ++r.hausdorff_flagged;
        }
    }
    r.iou = summarize(std::move(ious));
    r.dice = summarize(std::move(dices));
    if (!hds.empty()) r.hausdorff = summarize(std::move(hds));
    if (!scans.empty()) {
        std::vector<double> d3;
        for (const auto& s : scans) d3.push_back(s.dice_3d);
        r.dice_3d = summarize(std::move(d3));
    }
    r.per_slice = std::move(rows);
    r.per_scan_dice_3d = std::move(scans);
    return r;
}

SliceMetrics evaluate_slice(const std::string& scan_id, int slice_index, const BinaryMask& predicted,
                            const BinaryMask& truth) {
    SliceMetrics m{scan_id, slice_index, iou(predicted, truth), dice(predicted, truth), std::nullopt};
    if (!predicted.empty() && !truth.empty()) m.hausdorff = hausdorff(predicted, truth);
    return m;
}

}  // namespace lgan::metrics
