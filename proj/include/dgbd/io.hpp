#pragma once

// Dataset ingestion and output helpers.
//
// Input format: one delimited text file per dataset, header `unit,population`
// (comma or tab, detected from the header line), UTF-8. The dataset id is the
// file stem. Populations are non-negative integers; zeros are dropped with a
// warning because the fits work on logarithms.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dgbd/error.hpp"
#include "dgbd/ranksize.hpp"

namespace dgbd {

enum class UnitLevel { Country = 0, Primary = 1, Secondary = 2, City = 3 };

inline const char* to_string(UnitLevel l) noexcept {
    switch (l) {
        case UnitLevel::Country: return "country";
        case UnitLevel::Primary: return "PAU";
        case UnitLevel::Secondary: return "SAU";
        case UnitLevel::City: return "city";
    }
    return "?";
}

struct Unit {
    std::string name;
    std::uint64_t population = 0;
};

struct DatasetRecord {
    std::string id;
    UnitLevel unit_level = UnitLevel::Secondary;
    std::vector<Unit> rows;
    std::size_t dropped_zero = 0;
    std::string source;

    // Positive populations as a descending rank-size sample.
    RankSizeSample sample() const {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& u : rows) v.push_back(static_cast<double>(u.population));
        return RankSizeSample::from_unsorted(std::move(v), id);
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Splits one line on `delim`, honoring double-quoted fields ("" escapes a quote).
inline std::vector<std::string> split_fields(std::string_view line, char delim, bool& ok) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    ok = true;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back() += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += c;
            }
        } else if (c == '"' && trim(fields.back()).empty()) {
            fields.back().clear();
            quoted = true;
        } else if (c == delim) {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    if (quoted) ok = false;
    return fields;
}

}  // namespace detail

inline DatasetRecord parse_dataset(std::istream& in, const std::string& source, std::string id,
                                   std::vector<std::string>* warnings = nullptr) {
    DatasetRecord rec;
    rec.id = std::move(id);
    rec.source = source;
    if (rec.id.empty()) throw ParseError(source, 0, "dataset id is empty");

    std::string line;
    std::size_t lineno = 0;
    char delim = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (detail::trim(line).empty()) continue;

        if (delim == 0) {
            delim = line.find('\t') != std::string::npos ? '\t' : ',';
            bool ok = true;
            const auto header = detail::split_fields(line, delim, ok);
            if (!ok || header.size() != 2 || detail::lower(detail::trim(header[0])) != "unit" ||
                detail::lower(detail::trim(header[1])) != "population")
                throw ParseError(source, lineno, "expected header `unit,population`");
            continue;
        }

        bool ok = true;
        const auto fields = detail::split_fields(line, delim, ok);
        if (!ok) throw ParseError(source, lineno, "unterminated quoted field");
        if (fields.size() != 2)
            throw ParseError(source, lineno,
                             "expected 2 fields, found " + std::to_string(fields.size()));
        const auto text = detail::trim(fields[1]);
        std::uint64_t pop = 0;
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), pop);
        if (text.empty() || ec != std::errc{} || end != text.data() + text.size())
            throw ParseError(source, lineno,
                             "population `" + std::string(text) + "` is not a non-negative integer");
        if (pop == 0) {
            ++rec.dropped_zero;
            continue;
        }
        rec.rows.push_back({std::string(detail::trim(fields[0])), pop});
    }
    if (delim == 0) throw ParseError(source, lineno, "missing header `unit,population`");
    if (rec.dropped_zero > 0 && warnings)
        warnings->push_back(source + ": dropped " + std::to_string(rec.dropped_zero) +
                            " unit(s) with zero population");
    return rec;
}

inline DatasetRecord load_dataset(const std::filesystem::path& file,
                                  std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read " + file.string());
    return parse_dataset(in, file.string(), file.stem().string(), warnings);
}

// A file, or every .csv/.tsv/.txt file directly inside a directory (sorted
// by name).
inline std::vector<DatasetRecord> load_datasets(const std::filesystem::path& path,
                                                std::vector<std::string>* warnings = nullptr) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::is_regular_file(path, ec)) return {load_dataset(path, warnings)};
    if (!fs::is_directory(path, ec)) throw IoError("cannot read " + path.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path, ec)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = detail::lower(entry.path().extension().string());
        if (ext == ".csv" || ext == ".tsv" || ext == ".txt") files.push_back(entry.path());
    }
    if (ec) throw IoError("cannot list " + path.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    std::vector<DatasetRecord> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_dataset(f, warnings));
    return out;
}

// Six significant digits, the precision of every numeric output file.
inline std::string fmt6(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Quotes a CSV field when it contains a delimiter, quote or newline.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

// Writes through a sibling temp file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " into place");
    }
}

// Loads `label,b,a` style tables: any header containing `b`, `a` and one of
// `label`/`id`. Rows whose b or a is blank or NA are skipped.
struct LabeledPoint {
    std::string label;
    double b = 0.0;
    double a = 0.0;
};

inline std::vector<LabeledPoint> load_points(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read " + file.string());
    const std::string source = file.string();
    std::string line;
    std::size_t lineno = 0;
    int col_label = -1, col_b = -1, col_a = -1;
    std::vector<LabeledPoint> out;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        bool ok = true;
        const auto fields = detail::split_fields(line, ',', ok);
        if (!ok) throw ParseError(source, lineno, "unterminated quoted field");
        if (!have_header) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const auto name = detail::lower(detail::trim(fields[i]));
                if (name == "label" || name == "id") col_label = static_cast<int>(i);
                if (name == "b") col_b = static_cast<int>(i);
                if (name == "a") col_a = static_cast<int>(i);
            }
            if (col_label < 0 || col_b < 0 || col_a < 0)
                throw ParseError(source, lineno, "header needs label (or id), b and a columns");
            have_header = true;
            continue;
        }
        const auto need = static_cast<std::size_t>(std::max({col_label, col_b, col_a}));
        if (fields.size() <= need) throw ParseError(source, lineno, "too few fields");
        const auto bt = detail::trim(fields[static_cast<std::size_t>(col_b)]);
        const auto at = detail::trim(fields[static_cast<std::size_t>(col_a)]);
        if (bt.empty() || at.empty() || bt == "NA" || at == "NA") continue;
        auto parse = [&](std::string_view t) {
            std::string s(t);
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != s.size() || !std::isfinite(v))
                throw ParseError(source, lineno, "`" + s + "` is not a finite number");
            return v;
        };
        out.push_back({std::string(detail::trim(fields[static_cast<std::size_t>(col_label)])),
                       parse(bt), parse(at)});
    }
    if (!have_header) throw ParseError(source, lineno, "missing header");
    return out;
}

}  // namespace dgbd
