#include "nscreen/cli/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace nscreen::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_field(std::string_view field, const std::string& path, std::size_t line) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw IoError(path + ":" + std::to_string(line) + ": cannot parse '" + std::string(field) + "'");
    }
    return value;
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view content = trim(line);
        if (content.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = content.find(',', start);
            row.push_back(parse_field(content.substr(start, comma - start), path, line_no));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

Matrix read_matrix_csv(const std::string& path) {
    const auto rows = read_rows(path);
    if (rows.empty()) throw IoError(path + ": no data");
    const std::size_t cols = rows.front().size();
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            throw IoError(path + ": row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                          " fields, expected " + std::to_string(cols));
        }
        for (std::size_t j = 0; j < cols; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    return m;
}

Vector read_vector_csv(const std::string& path) {
    const auto rows = read_rows(path);
    if (rows.empty()) throw IoError(path + ": no data");
    std::vector<double> values;
    if (rows.size() == 1) {
        values = rows.front();
    } else {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != 1) {
                throw IoError(path + ": expected one value per line at row " + std::to_string(i + 1));
            }
            values.push_back(rows[i].front());
        }
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    auto out = open_out(path);
    std::string line;
    for (Index i = 0; i < m.rows(); ++i) {
        line.clear();
        for (Index j = 0; j < m.cols(); ++j) {
            if (j > 0) line += ',';
            line += format_double(m(i, j));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed for " + path);
}

void write_vector_csv(const std::string& path, const Vector& v) {
    auto out = open_out(path);
    for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace nscreen::io
