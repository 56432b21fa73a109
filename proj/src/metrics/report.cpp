#include "lgan/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lgan::report {

using metrics::MetricReport;

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) out.push_back(f);
    return out;
}

double parse_real(const std::string& s, int line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw IOError("report line " + std::to_string(line) + ": invalid number '" + s + "'");
    }
    return v;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string center(const std::string& s, std::size_t width) {
    if (s.size() >= width) return s;
    const std::size_t left = (width - s.size()) / 2;
    return std::string(left, ' ') + s + std::string(width - s.size() - left, ' ');
}

}  // namespace

std::string to_tsv(const MetricReport& r) {
    std::ostringstream out;
    out << "model\t" << r.model << '\n';
    for (const auto& s : r.per_slice) {
        out << "slice\t" << s.scan_id << '\t' << s.slice_index << '\t' << format_real(s.iou) << '\t'
            << format_real(s.dice) << '\t' << (s.hausdorff ? format_real(*s.hausdorff) : "NA") << '\n';
    }
    for (const auto& s : r.per_scan_dice_3d) out << "scan\t" << s.scan_id << '\t' << format_real(s.dice_3d) << '\n';
    auto agg = [&](const char* name, const metrics::Summary& s) {
        out << "aggregate\t" << name << '\t' << format_real(s.mean) << '\t' << format_real(s.median) << '\t' << s.count;
    };
    agg("iou", r.iou);
    out << '\n';
    agg("dice", r.dice);
    out << '\n';
    if (r.hausdorff) {
        agg("hausdorff", *r.hausdorff);
    } else {
        out << "aggregate\thausdorff\tNA\tNA\t0";
    }
    out << '\t' << r.hausdorff_flagged << '\n';
    if (r.dice_3d) {
        agg("dice_3d", *r.dice_3d);
        out << '\n';
    }
    return out.str();
}

MetricReport from_tsv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::string model;
    std::vector<metrics::SliceMetrics> rows;
    std::vector<metrics::ScanDice> scans;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto f = fields_of(line);
        if (f[0] == "model" && f.size() >= 2) {
            model = f[1];
        } else if (f[0] == "slice" && f.size() == 6) {
            metrics::SliceMetrics s;
            s.scan_id = f[1];
            s.slice_index = static_cast<int>(parse_real(f[2], line_no));
            s.iou = parse_real(f[3], line_no);
            s.dice = parse_real(f[4], line_no);
            if (f[5] != "NA") s.hausdorff = parse_real(f[5], line_no);
            rows.push_back(std::move(s));
        } else if (f[0] == "scan" && f.size() == 3) {
            scans.push_back({f[1], parse_real(f[2], line_no)});
        } else if (f[0] != "aggregate") {
            throw IOError("report line " + std::to_string(line_no) + ": unrecognised record");
        }
    }
    // Aggregates are recomputed from the rows rather than trusted.
    return metrics::aggregate(model, std::move(rows), std::move(scans));
}

void write_report(const std::filesystem::path& path, const MetricReport& r) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IOError("cannot write " + path.string());
        out << to_tsv(r);
        if (!out) throw IOError("write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

MetricReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IOError("missing report " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_tsv(ss.str());
}

std::string comparison_table(const std::vector<MetricReport>& reports) {
    std::size_t name_w = 5;
    for (const auto& r : reports) name_w = std::max(name_w, r.model.size());
    name_w += 2;
    constexpr std::size_t cell = 11;
    const std::string rule = "+" + std::string(name_w, '-') + "+" + std::string(cell, '-') + "+" +
                             std::string(cell, '-') + "+" + std::string(cell, '-') + "+" + std::string(cell, '-') + "+\n";
    std::ostringstream out;
    out << rule;
    out << "|" << std::string(name_w, ' ') << "|" << center("Mean", 2 * cell + 1) << "|" << center("Median", 2 * cell + 1)
        << "|\n";
    out << rule;
    out << "|" << pad(" Model", name_w) << "|" << center("IOU", cell) << "|" << center("Hausdorff", cell) << "|"
        << center("IOU", cell) << "|" << center("Hausdorff", cell) << "|\n";
    out << rule;
    for (const auto& r : reports) {
        const std::string hd_mean = r.hausdorff ? fixed4(r.hausdorff->mean) : "NA";
        const std::string hd_median = r.hausdorff ? fixed4(r.hausdorff->median) : "NA";
        out << "|" << pad(" " + r.model, name_w) << "|" << center(fixed4(r.iou.mean), cell) << "|"
            << center(hd_mean, cell) << "|" << center(fixed4(r.iou.median), cell) << "|" << center(hd_median, cell)
            << "|\n";
        out << rule;
    }
    return out.str();
}

std::string dice_3d_table(const std::vector<MetricReport>& reports) {
    std::size_t name_w = 5;
    for (const auto& r : reports) name_w = std::max(name_w, r.model.size());
    name_w += 2;
    constexpr std::size_t cell = 17;
    const std::string rule =
        "+" + std::string(name_w, '-') + "+" + std::string(cell, '-') + "+" + std::string(cell, '-') + "+\n";
    std::ostringstream out;
    out << rule << "|" << pad(" Model", name_w) << "|" << center("Mean", cell) << "|" << center("Median", cell)
        << "|\n"
        << rule;
    for (const auto& r : reports) {
        std::string mean = "NA";
        std::string median = "NA";
        if (r.dice_3d) {
            double var = 0.0;
            for (const auto& s : r.per_scan_dice_3d) var += (s.dice_3d - r.dice_3d->mean) * (s.dice_3d - r.dice_3d->mean);
            const double sd = std::sqrt(var / static_cast<double>(r.per_scan_dice_3d.size()));
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.3f+-%.2f", r.dice_3d->mean, sd);
            mean = buf;
            median = fixed4(r.dice_3d->median);
        }
        out << "|" << pad(" " + r.model, name_w) << "|" << center(mean, cell) << "|" << center(median, cell) << "|\n"
            << rule;
    }
    return out.str();
}

}  // namespace lgan::report
