#ifndef RARESUB_ERROR_HPP
#define RARESUB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace raresub {

// One enumerator per failure condition the public operations can raise.
// Grouped by the coarse category the C API and CLI report.
enum class ErrorCode {
    // configuration / argument problems
    InvalidArgument,
    InvalidDims,
    InfeasibleSpec,
    // file and format problems
    MissingFile,
    IoFailure,
    MalformedHeader,
    NonNumericCell,
    MalformedJson,
    // data / domain violations
    DuplicateSampleId,
    DuplicateGeneId,
    EmptyJoin,
    UnknownClass,
    NegativeInput,
    NoVariableGenes,
    ZeroVarianceColumn,
    TooFewSamples,
    ShapeMismatch,
    LengthMismatch,
    KTooLarge,
    DegenerateData,
    SingleCluster,
    CoincidentCentroids,
    NonSquare,
    NonFinite,
    LabelOutOfRange,
    OutOfRangeP,
    ZeroMarginal,
    ClusterTooSmall,
    MissingUpstream,
    // numeric failures
    NonFiniteLoss,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidDims: return "InvalidDims";
        case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::NonNumericCell: return "NonNumericCell";
        case ErrorCode::MalformedJson: return "MalformedJson";
        case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
        case ErrorCode::DuplicateGeneId: return "DuplicateGeneId";
        case ErrorCode::EmptyJoin: return "EmptyJoin";
        case ErrorCode::UnknownClass: return "UnknownClass";
        case ErrorCode::NegativeInput: return "NegativeInput";
        case ErrorCode::NoVariableGenes: return "NoVariableGenes";
        case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::DegenerateData: return "DegenerateData";
        case ErrorCode::SingleCluster: return "SingleCluster";
        case ErrorCode::CoincidentCentroids: return "CoincidentCentroids";
        case ErrorCode::NonSquare: return "NonSquare";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::OutOfRangeP: return "OutOfRangeP";
        case ErrorCode::ZeroMarginal: return "ZeroMarginal";
        case ErrorCode::ClusterTooSmall: return "ClusterTooSmall";
        case ErrorCode::MissingUpstream: return "MissingUpstream";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    }
    return "UnknownError";
}

}  // namespace raresub

#endif
