#pragma once

// Results table and plot-data files for a pipeline run.
//
//   results.csv, results.txt      one row per input dataset
//   plots/<id>_ranksize.csv       rank, observed, fitted
//   plots/hist_b.csv, hist_a.csv  bin_lo, bin_hi, count
//   plots/scatter_ba.csv          label, b, a, kind
//   plots/dendrogram.csv          complete-linkage merge list
//   plots/clusters.csv            label, cluster at the cut height
//
// Histograms, scatter and dendrogram cover the DGBD-good datasets only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dgbd/io.hpp"
#include "dgbd/pipeline.hpp"
#include "dgbd/taxonomy.hpp"

namespace dgbd {

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

inline double quantile_sorted(const std::vector<double>& s, double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < s.size() ? s[i] + frac * (s[i + 1] - s[i]) : s[i];
}

// 2 IQR n^(-1/3). Falls back to range / (1 + log2 n) for zero IQR, and to 1
// for a zero range.
inline double freedman_diaconis_width(std::vector<double> values) {
    if (values.empty()) return 1.0;
    std::sort(values.begin(), values.end());
    const double iqr = quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25);
    const double n = static_cast<double>(values.size());
    if (iqr > 0.0) return 2.0 * iqr / std::cbrt(n);
    const double range = values.back() - values.front();
    if (range > 0.0) return range / (1.0 + std::log2(n));
    return 1.0;
}

// Bins [lo, lo + width) aligned to integer multiples of `width`.
inline std::vector<HistogramBin> histogram(const std::vector<double>& values, double width) {
    if (!(width > 0.0)) throw DomainError("histogram bin width must be positive");
    if (values.empty()) return {};
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const auto first = static_cast<long long>(std::floor(*mn / width));
    const auto last = static_cast<long long>(std::floor(*mx / width));
    std::vector<HistogramBin> bins(static_cast<std::size_t>(last - first + 1));
    for (std::size_t i = 0; i < bins.size(); ++i) {
        bins[i].lo = static_cast<double>(first + static_cast<long long>(i)) * width;
        bins[i].hi = bins[i].lo + width;
    }
    for (double v : values) {
        auto i = static_cast<long long>(std::floor(v / width)) - first;
        bins[static_cast<std::size_t>(std::clamp(i, 0LL, last - first))].count++;
    }
    return bins;
}

struct ReportOptions {
    std::filesystem::path out_dir = ".";
    std::optional<double> bin_width;   // Freedman-Diaconis when unset
    std::optional<double> cut_height;  // half the maximum merge height when unset
};

namespace detail {

inline std::string status_label(const PipelineResult& r) {
    if (r.status == RecordStatus::Excluded) return "Excluded";
    if (r.status == RecordStatus::Failed) return "Failed";
    return to_string(r.classification);
}

inline std::vector<std::vector<std::string>> results_rows(const std::vector<PipelineResult>& results) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"id", "b", "a", "r_squared", "n", "p_value", "aic_diff", "classification",
                    "d_zipf", "d_uniform", "d_delta", "d_lavalette", "note"});
    for (const auto& r : results) {
        std::vector<std::string> row{r.id};
        if (r.status == RecordStatus::Analyzed) {
            row.push_back(fmt6(r.dgbd.params.b));
            row.push_back(fmt6(r.dgbd.params.a));
            row.push_back(fmt6(r.dgbd.r_squared));
            row.push_back(std::to_string(r.n));
            row.push_back(fmt6(r.p_value()));
            row.push_back(fmt6(r.comparison.log_aic_diff));
            row.push_back(status_label(r));
            for (double d : r.distances) row.push_back(fmt6(d));
            std::string note = r.reason;
            if (!r.comparison.log_diff_defined) {
                if (!note.empty()) note += "; ";
                note += "aic_diff is the raw AIC difference";
            }
            row.push_back(note);
        } else {
            row.insert(row.end(), {"NA", "NA", "NA", std::to_string(r.n), "NA", "NA", status_label(r),
                                   "NA", "NA", "NA", "NA", r.reason});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string to_csv(const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
        out << '\n';
    }
    return out.str();
}

inline std::string to_aligned(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += "  ";
            line += row[i];
            if (i + 1 < row.size()) line.append(width[i] - row[i].size(), ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
    return out.str();
}

inline std::string histogram_csv(const std::vector<HistogramBin>& bins) {
    std::string out = "bin_lo,bin_hi,count\n";
    for (const auto& b : bins) out += fmt6(b.lo) + "," + fmt6(b.hi) + "," + std::to_string(b.count) + "\n";
    return out;
}

}  // namespace detail

inline std::string ranksize_csv(const std::vector<double>& ranked, const DgbdParams& params) {
    std::string out = "rank,observed,fitted\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const double r = static_cast<double>(i + 1);
        out += std::to_string(i + 1) + "," + fmt6(ranked[i]) + "," + fmt6(eval_dgbd(params, r)) + "\n";
    }
    return out;
}

inline std::string dendrogram_csv(const ClusterTree& tree) {
    const auto& leaves = tree.leaves();
    auto label = [&](std::size_t id) { return id < leaves.size() ? csv_field(leaves[id]) : std::string{}; };
    std::string out = "step,left,right,left_label,right_label,height,size\n";
    for (std::size_t i = 0; i < tree.merges().size(); ++i) {
        const auto& m = tree.merges()[i];
        out += std::to_string(i + 1) + "," + std::to_string(m.left) + "," + std::to_string(m.right) + "," +
               label(m.left) + "," + label(m.right) + "," + fmt6(m.height) + "," + std::to_string(m.size) + "\n";
    }
    return out;
}

inline std::string clusters_csv(const Partition& partition) {
    std::string out = "label,cluster\n";
    for (std::size_t c = 0; c < partition.size(); ++c)
        for (const auto& l : partition[c]) out += csv_field(l) + "," + std::to_string(c + 1) + "\n";
    return out;
}

inline void emit_report(const std::vector<PipelineResult>& results, const ReportOptions& opts) {
    namespace fs = std::filesystem;
    const auto rows = detail::results_rows(results);
    write_file_atomic(opts.out_dir / "results.csv", detail::to_csv(rows));
    write_file_atomic(opts.out_dir / "results.txt", detail::to_aligned(rows));

    const fs::path plots = opts.out_dir / "plots";
    std::vector<ParamPoint> good;
    for (const auto& r : results) {
        if (r.status != RecordStatus::Analyzed) continue;
        write_file_atomic(plots / (r.id + "_ranksize.csv"), ranksize_csv(r.ranked, r.dgbd.params));
        if (r.classification == Classification::DgbdGood) good.push_back(r.point());
    }

    std::vector<double> bs, as;
    for (const auto& p : good) {
        bs.push_back(p.b);
        as.push_back(p.a);
    }
    write_file_atomic(plots / "hist_b.csv",
                      detail::histogram_csv(histogram(bs, opts.bin_width.value_or(freedman_diaconis_width(bs)))));
    write_file_atomic(plots / "hist_a.csv",
                      detail::histogram_csv(histogram(as, opts.bin_width.value_or(freedman_diaconis_width(as)))));

    std::string scatter = "label,b,a,kind\n";
    for (const auto& p : good) scatter += csv_field(p.label) + "," + fmt6(p.b) + "," + fmt6(p.a) + ",data\n";
    for (auto ref : {Reference::Zipf, Reference::Uniform, Reference::Delta}) {
        const auto [b, a] = reference_location(ref);
        scatter += std::string(to_string(ref)) + "," + fmt6(b) + "," + fmt6(a) + ",reference\n";
    }
    write_file_atomic(plots / "scatter_ba.csv", scatter);

    if (good.size() >= 2) {
        const auto tree = complete_linkage(good);
        write_file_atomic(plots / "dendrogram.csv", dendrogram_csv(tree));
        const double cut = opts.cut_height.value_or(default_cut_height(tree));
        write_file_atomic(plots / "clusters.csv",
                          clusters_csv(cut > 0.0 ? cut_tree(tree, cut) : normalize(Partition{tree.leaves()})));
    } else {
        write_file_atomic(plots / "dendrogram.csv", "step,left,right,left_label,right_label,height,size\n");
        Partition single;
        for (const auto& p : good) single.push_back({p.label});
        write_file_atomic(plots / "clusters.csv", clusters_csv(single));
    }
}

}  // namespace dgbd
