#pragma once

#include <stdexcept>
#include <string>

namespace nscreen {

enum class ErrorKind {
    ZeroColumn,
    DimensionMismatch,
    NonPositiveLambda,
    InvalidConfig,
    SingularSystem,
    DegenerateResponse,
    EmptyPath,
    SingularNewtonSystem,
    InvalidRho,
    InvalidDimensions,
    InvalidT,
    ZeroTruth,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

    /// Same kind, message prefixed with `context`.
    Error with_context(const std::string& context) const { return Error(kind_, context + ": " + detail_); }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace nscreen
