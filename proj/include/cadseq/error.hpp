#pragma once

#include <stdexcept>
#include <string>

namespace cadseq {

enum class ErrorCode {
    GrammarError,
    TooLong,
    OpenLoop,
    DegenerateCurve,
    DegenerateArc,
    DegenerateProfile,
    EmptyGeometry,
    OutOfRange,
    ZeroDepth,
    EmptySolid,
    EmptyCloud,
    EmptyInput,
    LengthMismatch,
    ShapeMismatch,
    NonFinite,
    BadLevel,
    TooSmall,
    IdMismatch,
    IoError,
    BadConfig,
};

const char* error_code_name(ErrorCode code);

// All recoverable failures raise this; `index` points at the offending
// command / slot / tensor where that is meaningful, -1 otherwise.
class CadError : public std::runtime_error {
public:
    CadError(ErrorCode code, std::string message, long index = -1)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          index_(index) {}

    ErrorCode code() const { return code_; }
    long index() const { return index_; }

private:
    ErrorCode code_;
    long index_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::GrammarError: return "GrammarError";
        case ErrorCode::TooLong: return "TooLong";
        case ErrorCode::OpenLoop: return "OpenLoop";
        case ErrorCode::DegenerateCurve: return "DegenerateCurve";
        case ErrorCode::DegenerateArc: return "DegenerateArc";
        case ErrorCode::DegenerateProfile: return "DegenerateProfile";
        case ErrorCode::EmptyGeometry: return "EmptyGeometry";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::ZeroDepth: return "ZeroDepth";
        case ErrorCode::EmptySolid: return "EmptySolid";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::BadLevel: return "BadLevel";
        case ErrorCode::TooSmall: return "TooSmall";
        case ErrorCode::IdMismatch: return "IdMismatch";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::BadConfig: return "BadConfig";
    }
    return "UnknownError";
}

}  // namespace cadseq
