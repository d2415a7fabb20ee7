#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rnca/numeric_core.hpp"

namespace rnca::io {

/// Shortest-safe round-trip rendering: 17 significant digits.
inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline bool parse_real(std::string_view s, double& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

struct Table {
    std::vector<std::string> header;
    Matrix data;
};

/// Comma-separated numeric table. A first line that does not parse as
/// numbers is taken as a header. Blank lines are ignored.
inline Table read_csv_stream(std::istream& in, const std::string& name) {
    Table t;
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split(line);
        std::vector<double> vals(fields.size());
        bool numeric = true;
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (!parse_real(fields[i], vals[i])) numeric = false;
        if (!numeric) {
            if (first) {
                for (auto f : fields) t.header.emplace_back(f);
                first = false;
                continue;
            }
            throw FormatError(name + ":" + std::to_string(lineno) + ": non-numeric field");
        }
        first = false;
        if (!rows.empty() && vals.size() != rows.front().size())
            throw FormatError(name + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(rows.front().size()) + " fields, found " + std::to_string(vals.size()));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw FormatError(name + ": no data rows");
    if (!t.header.empty() && t.header.size() != rows.front().size())
        throw FormatError(name + ": header has " + std::to_string(t.header.size()) + " fields, data has " +
                          std::to_string(rows.front().size()));
    t.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) t.data(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    if (!t.data.allFinite()) throw FormatError(name + ": non-finite values");
    return t;
}

inline Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    return read_csv_stream(in, path);
}

inline void write_csv_stream(std::ostream& out, const Matrix& m, const std::vector<std::string>& header = {}) {
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
        out << '\n';
    }
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_real(m(i, j));
        out << '\n';
    }
}

inline void write_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    write_csv_stream(out, m, header);
    if (!out) throw FormatError("write to '" + path + "' failed");
}

/// Integer labels from a single-column table.
inline std::vector<int> to_labels(const Matrix& m, const std::string& name) {
    if (m.cols() != 1) throw FormatError(name + ": labels must be a single column");
    std::vector<int> out(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) {
        const double v = m(i, 0);
        if (v != static_cast<double>(static_cast<int>(v)) || v < 0)
            throw FormatError(name + ": labels must be non-negative integers");
        out[static_cast<std::size_t>(i)] = static_cast<int>(v);
    }
    return out;
}

/// IDX (MNIST) file: big-endian magic 0x0000 <type> <ndims>, dims, then
/// payload. Unsigned-byte payloads only; rows are the first dimension.
inline Matrix read_idx(const std::string& path, Index limit = -1) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    unsigned char magic[4];
    if (!in.read(reinterpret_cast<char*>(magic), 4)) throw FormatError(path + ": truncated IDX header");
    if (magic[0] != 0 || magic[1] != 0 || magic[2] != 0x08)
        throw FormatError(path + ": not an unsigned-byte IDX file");
    const int ndims = magic[3];
    if (ndims < 1) throw FormatError(path + ": IDX file has no dimensions");
    std::vector<std::uint32_t> dims(static_cast<std::size_t>(ndims));
    for (auto& d : dims) {
        unsigned char b[4];
        if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError(path + ": truncated IDX header");
        d = (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
    }
    Index rows = dims[0];
    Index cols = 1;
    for (std::size_t i = 1; i < dims.size(); ++i) cols *= dims[i];
    if (limit >= 0 && limit < rows) rows = limit;
    Matrix out(rows, cols);
    std::vector<unsigned char> buf(static_cast<std::size_t>(cols));
    for (Index i = 0; i < rows; ++i) {
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(cols)))
            throw FormatError(path + ": truncated IDX payload");
        for (Index j = 0; j < cols; ++j) out(i, j) = buf[static_cast<std::size_t>(j)];
    }
    return out;
}

}  // namespace rnca::io
