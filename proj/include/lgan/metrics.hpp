#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lgan/image.hpp"

namespace lgan::metrics {

// |X ∩ Y| / |X ∪ Y|; 1.0 when both masks are empty.
double iou(const BinaryMask& x, const BinaryMask& y);

// 2|X ∩ Y| / (|X| + |Y|); 1.0 when both masks are empty.
double dice(const BinaryMask& x, const BinaryMask& y);

// Dice over the pooled voxels of every slice of one scan.
double dice_3d(std::span<const BinaryMask> predicted, std::span<const BinaryMask> truth);

// Symmetric Hausdorff distance between the foreground pixel sets, in pixel
// units (Euclidean). Throws EmptyMask if either mask has no foreground.
double hausdorff(const BinaryMask& m, const BinaryMask& g);

// Squared Euclidean distance from every pixel to the nearest foreground pixel
// of `mask` (exact, separable lower-envelope transform). Background-free
// masks yield +infinity everywhere.
std::vector<double> squared_distance_transform(const BinaryMask& mask);

struct SliceMetrics {
    std::string scan_id;
    int slice_index = 0;
    double iou = 0.0;
    double dice = 0.0;
    std::optional<double> hausdorff;  // nullopt: an empty mask was involved
};

struct ScanDice {
    std::string scan_id;
    double dice_3d = 0.0;
};

struct Summary {
    double mean = 0.0;
    double median = 0.0;
    std::size_t count = 0;
};

// Mean and median (even count: average of the two middle values).
Summary summarize(std::vector<double> values);

struct MetricReport {
    std::string model;
    std::vector<SliceMetrics> per_slice;
    std::vector<ScanDice> per_scan_dice_3d;
    Summary iou;
    Summary dice;
    std::optional<Summary> hausdorff;  // absent when every slice was flagged
    std::size_t hausdorff_flagged = 0;
    std::optional<Summary> dice_3d;
};

// Builds the aggregates from per-slice rows; throws EmptyReport on no rows.
MetricReport aggregate(std::string model, std::vector<SliceMetrics> rows, std::vector<ScanDice> scans = {});

// Metrics of one predicted slice against its ground truth.
SliceMetrics evaluate_slice(const std::string& scan_id, int slice_index, const BinaryMask& predicted,
                            const BinaryMask& truth);

}  // namespace lgan::metrics
