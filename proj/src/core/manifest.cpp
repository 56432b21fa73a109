#include "lgan/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lgan/png_io.hpp"

namespace lgan {

const char* to_string(Split s) { return s == Split::Train ? "train" : "test"; }

std::vector<ManifestEntry> DatasetManifest::select(Split s) const {
    std::vector<ManifestEntry> out;
    std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
                 [s](const ManifestEntry& e) { return e.split == s; });
    return out;
}

std::size_t DatasetManifest::count(Split s) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [s](const ManifestEntry& e) { return e.split == s; }));
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return fields;
}

std::string where(const std::filesystem::path& path, int line) {
    return path.string() + ", line " + std::to_string(line) + ": ";
}

}  // namespace

void check_scan_partition(const DatasetManifest& manifest) {
    std::map<std::string, Split> seen;
    for (const auto& e : manifest.entries) {
        auto [it, inserted] = seen.emplace(e.scan_id, e.split);
        if (!inserted && it->second != e.split) {
            throw ManifestError("scan '" + e.scan_id + "' appears in both train and test splits");
        }
    }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("manifest not found: " + path.string());
    const std::filesystem::path base = path.parent_path();

    DatasetManifest manifest;
    std::set<std::pair<std::string, int>> keys;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 5) {
            throw ManifestError(where(path, line_no) + "expected 5 tab-separated fields, found " +
                                std::to_string(fields.size()));
        }
        ManifestEntry e;
        e.image_path = base / fields[0];
        e.mask_path = base / fields[1];
        e.scan_id = fields[2];
        if (e.scan_id.empty()) throw ManifestError(where(path, line_no) + "empty scan id");
        const auto& idx = fields[3];
        auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), e.slice_index);
        if (ec != std::errc{} || ptr != idx.data() + idx.size() || e.slice_index < 0) {
            throw ManifestError(where(path, line_no) + "invalid slice index '" + idx + "'");
        }
        if (fields[4] == "train") {
            e.split = Split::Train;
        } else if (fields[4] == "test") {
            e.split = Split::Test;
        } else {
            throw ManifestError(where(path, line_no) + "split must be train or test, got '" + fields[4] + "'");
        }
        for (const auto* p : {&e.image_path, &e.mask_path}) {
            if (!std::filesystem::is_regular_file(*p)) {
                throw MissingFile(where(path, line_no) + "missing file " + p->string());
            }
        }
        if (!keys.emplace(e.scan_id, e.slice_index).second) {
            throw ManifestError(where(path, line_no) + "duplicate slice " + e.scan_id + "/" + idx);
        }
        manifest.entries.push_back(std::move(e));
    }
    if (manifest.entries.empty()) throw EmptyManifest("manifest has no records: " + path.string());
    check_scan_partition(manifest);
    return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    const std::filesystem::path base = path.parent_path();
    auto rel = [&](const std::filesystem::path& p) {
        auto r = p.lexically_relative(base);
        return (r.empty() || *r.begin() == "..") ? p.string() : r.string();
    };
    std::ostringstream out;
    for (const auto& e : manifest.entries) {
        out << rel(e.image_path) << '\t' << rel(e.mask_path) << '\t' << e.scan_id << '\t' << e.slice_index
            << '\t' << to_string(e.split) << '\n';
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IOError("cannot write " + path.string());
        f << out.str();
        if (!f) throw IOError("write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

std::vector<LabeledSlice> load_slices(const DatasetManifest& manifest, Split split, int size) {
    std::vector<LabeledSlice> out;
    for (const auto& e : manifest.entries) {
        if (e.split != split) continue;
        LabeledSlice s{e.scan_id, e.slice_index, load_gray_png(e.image_path), load_mask_png(e.mask_path)};
        if (!s.image.same_shape(s.mask)) {
            throw ShapeError("image and mask differ in size: " + e.image_path.string());
        }
        if (size > 0) {
            s.image = resample_bilinear(s.image, size, size);
            s.mask = resample_nearest(s.mask, size, size);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<VolumeScan> group_scans(const std::vector<LabeledSlice>& slices) {
    std::vector<VolumeScan> scans;
    std::map<std::string, std::size_t> index;
    for (const auto& s : slices) {
        auto [it, inserted] = index.emplace(s.scan_id, scans.size());
        if (inserted) scans.push_back(VolumeScan{s.scan_id, {}});
        auto& scan = scans[it->second];
        if (!scan.slices.empty() && !scan.slices.front().image.same_shape(s.image)) {
            throw ShapeError("slices of scan '" + s.scan_id + "' differ in size");
        }
        scan.slices.push_back(s);
    }
    for (auto& scan : scans) {
        std::stable_sort(scan.slices.begin(), scan.slices.end(),
                         [](const LabeledSlice& a, const LabeledSlice& b) { return a.slice_index < b.slice_index; });
    }
    return scans;
}

}  // namespace lgan
