#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbce {

enum class ErrorCode {
    BadConfig,
    BadData,
    ConstantColumn,
    NonFiniteInput,
    NumericalFailure,
    Degenerate,
    EmptyInput,
    DivisionByZero,
    NonConvergence,
    EmptyPath,
    GridTooCoarse,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable error category.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Thrown by `standardize` when a zero-variance column would be scaled.
class ConstantColumnError : public Error {
public:
    explicit ConstantColumnError(std::size_t column);
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

}  // namespace rbce
