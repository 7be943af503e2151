#pragma once

// CSV and PGM artifacts, key=value configuration files.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "ipl/radon.hpp"

namespace ipl {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Column = std::pair<std::string, std::vector<double>>;

/// Shortest text that still carries 17 significant digits.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+')
        ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw IoError("not a number: '" + s + "'");
    return v;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

/// Header row and comma-separated rows; columns must have equal length.
inline void emit_csv(const std::filesystem::path& path, const std::vector<Column>& columns) {
    std::size_t rows = columns.empty() ? 0 : columns.front().second.size();
    for (const Column& c : columns)
        if (c.second.size() != rows)
            throw IoError("emit_csv: columns differ in length");
    std::ofstream os = open_output(path);
    for (std::size_t j = 0; j < columns.size(); ++j)
        os << (j ? "," : "") << columns[j].first;
    os << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            os << (j ? "," : "") << format_double(columns[j].second[i]);
        os << '\n';
    }
    if (!os)
        throw IoError("write failed: " + path.string());
}

inline std::vector<Column> read_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open " + path.string());
    std::vector<Column> cols;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(l);
        while (std::getline(ss, cell, ','))
            out.push_back(cell);
        return out;
    };
    if (!std::getline(is, line))
        throw IoError("empty csv: " + path.string());
    for (const std::string& h : split(line))
        cols.push_back({h, {}});
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto cells = split(line);
        if (cells.size() != cols.size())
            throw IoError("ragged csv row in " + path.string());
        for (std::size_t j = 0; j < cells.size(); ++j)
            cols[j].second.push_back(parse_double(cells[j]));
    }
    return cols;
}

/// Sidecar path "<stem>.scale.txt" next to the image.
inline std::filesystem::path pgm_scale_path(const std::filesystem::path& pgm) {
    std::filesystem::path p = pgm;
    p.replace_extension(".scale.txt");
    return p;
}

/// P2 with maxval 65535, rows from top (largest x2) to bottom, columns by
/// increasing x1. Values map affinely from [min, max]; a constant image is
/// written as zeros.
inline void emit_pgm(const std::filesystem::path& path, const ImageGrid& img) {
    const double lo = img.values.minCoeff();
    const double hi = img.values.maxCoeff();
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw IoError("emit_pgm: non-finite pixel");
    const int n = img.size();
    std::ofstream os = open_output(path);
    os << "P2\n" << n << ' ' << n << "\n65535\n";
    for (int b = n - 1; b >= 0; --b) {
        for (int a = 0; a < n; ++a) {
            long v = 0;
            if (hi > lo)
                v = std::lround((img.values(a, b) - lo) / (hi - lo) * 65535.0);
            os << (a ? " " : "") << std::clamp(v, 0L, 65535L);
        }
        os << '\n';
    }
    if (!os)
        throw IoError("write failed: " + path.string());
    std::ofstream sc = open_output(pgm_scale_path(path));
    sc << "min=" << format_double(lo) << "\nmax=" << format_double(hi) << '\n';
    if (!sc)
        throw IoError("write failed: " + pgm_scale_path(path).string());
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// key=value lines; '#' starts a comment line, blank lines are skipped.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open config " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0)
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return out;
}

} // namespace ipl
