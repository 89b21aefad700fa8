#pragma once

#include <stdexcept>
#include <string>

#include "nscreen/core_types.hpp"

namespace nscreen::io {

/// Unreadable file or malformed numeric content.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Comma-separated, no header, one matrix row per line. Blank lines are skipped.
Matrix read_matrix_csv(const std::string& path);

/// One value per line; a single comma-separated row is also accepted.
Vector read_vector_csv(const std::string& path);

void write_matrix_csv(const std::string& path, const Matrix& m);
void write_vector_csv(const std::string& path, const Vector& v);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace nscreen::io
