#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lgan/image.hpp"

namespace lgan {

enum class Split { Train, Test };

const char* to_string(Split s);

struct ManifestEntry {
    std::filesystem::path image_path;
    std::filesystem::path mask_path;
    std::string scan_id;
    int slice_index = 0;
    Split split = Split::Train;

    bool operator==(const ManifestEntry&) const = default;
};

// Paired-image dataset index. Relative paths in the file are resolved
// against the manifest's directory; entries keep file order.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    [[nodiscard]] std::vector<ManifestEntry> select(Split s) const;
    [[nodiscard]] std::size_t count(Split s) const;
};

// Line format: <image>\t<mask>\t<scan_id>\t<slice_index>\t<train|test>
// Empty lines and lines starting with '#' are ignored.
DatasetManifest load_manifest(const std::filesystem::path& path);

// Writes paths relative to the manifest directory when they live under it.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// Throws ManifestError when a scan id occurs in both splits.
void check_scan_partition(const DatasetManifest& manifest);

struct LabeledSlice {
    std::string scan_id;
    int slice_index = 0;
    GrayImage image;
    BinaryMask mask;
};

// One patient scan: slices sorted by slice index, all the same size.
struct VolumeScan {
    std::string scan_id;
    std::vector<LabeledSlice> slices;
};

// Loads every entry of `split`, resized to `size` x `size` when size > 0.
std::vector<LabeledSlice> load_slices(const DatasetManifest& manifest, Split split, int size = 0);

// Groups slices by scan id in first-appearance order.
std::vector<VolumeScan> group_scans(const std::vector<LabeledSlice>& slices);

}  // namespace lgan
