#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rankshift {

enum class ErrorCode {
    // validation of numeric inputs
    NegativeEntry,
    RowSumOutOfTolerance,
    DegenerateShape,
    NonFinite,
    DimensionMismatch,
    LabelOutOfRange,
    NegativeLabel,
    InvariantViolation,
    // ingestion
    ParseError,
    ShapeError,
    SchemaError,
    DuplicateModelId,
    MissingFile,
    EmptySubset,
    // requests
    MissingSideInput,
    InfeasibleConfig,
    SubsampleTooSmall,
    // numeric degeneracies
    ZeroRowMass,
    ZeroReferenceNorm,
    ConstantSeries,
    DegenerateX,
    // everything else
    IoError,
};

std::string_view error_code_name(ErrorCode code);

// Process exit status for a failure of this kind:
// 2 input/schema error, 3 numeric degeneracy, 1 other.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rankshift
