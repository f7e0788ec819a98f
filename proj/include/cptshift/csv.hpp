#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cptshift {

/// %.12g formatting shared by every tabular output.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Comma-separated table with a header row; final line newline-terminated.
inline void emit_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(header);
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::invalid_argument("row width does not match header");
        line(row);
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void emit_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<std::string>> text;
    text.reserve(rows.size());
    for (const auto& row : rows) {
        auto& cells = text.emplace_back();
        cells.reserve(row.size());
        for (double v : row) cells.push_back(format_number(v));
    }
    emit_table(path, header, text);
}

} // namespace cptshift
