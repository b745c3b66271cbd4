#include "rbce/error.hpp"

namespace rbce {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::BadData: return "BadData";
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DivisionByZero: return "DivisionByZero";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::EmptyPath: return "EmptyPath";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    }
    return "Unknown";
}

ConstantColumnError::ConstantColumnError(std::size_t column)
    : Error(ErrorCode::ConstantColumn,
            "predictor column " + std::to_string(column) + " has zero variance"),
      column_(column) {}

}  // namespace rbce
