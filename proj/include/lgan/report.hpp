#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lgan/metrics.hpp"

namespace lgan::report {

// Tab-separated report:
//   model <name>
//   slice <scan_id> <slice_index> <iou> <dice> <hausdorff|NA>
//   scan <scan_id> <dice_3d>
//   aggregate <metric> <mean> <median> <count> [<flagged>]
// Reals are printed with 17 significant digits so a parsed report
// reproduces the in-memory values exactly.
std::string to_tsv(const metrics::MetricReport& r);
metrics::MetricReport from_tsv(const std::string& text);

void write_report(const std::filesystem::path& path, const metrics::MetricReport& r);
metrics::MetricReport read_report(const std::filesystem::path& path);

// Model x {Mean, Median} x {IOU, Hausdorff}, one row per report in order.
std::string comparison_table(const std::vector<metrics::MetricReport>& reports);

// Per-scan volume Dice: one row per model, mean ± std and median.
std::string dice_3d_table(const std::vector<metrics::MetricReport>& reports);

std::string format_real(double v);

}  // namespace lgan::report
