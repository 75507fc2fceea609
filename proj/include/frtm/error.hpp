#pragma once

#include <stdexcept>
#include <string>

namespace frtm {

enum class ErrorKind {
    InvalidInput,
    InsufficientData,
    DomainError,
    DegenerateNorm,
    InfeasibleGrid,
    NoFeasiblePath,
    BandInfeasible,
    NotMonotone,
    InvalidWarping,
    InvalidAlpha,
    VersionMismatch,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Validation-type failures map to CLI exit code 2, numerical ones to 3.
    bool is_validation() const noexcept {
        return kind_ == ErrorKind::InvalidInput || kind_ == ErrorKind::VersionMismatch ||
               kind_ == ErrorKind::InvalidAlpha || kind_ == ErrorKind::Io;
    }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::DegenerateNorm: return "DegenerateNorm";
        case ErrorKind::InfeasibleGrid: return "InfeasibleGrid";
        case ErrorKind::NoFeasiblePath: return "NoFeasiblePath";
        case ErrorKind::BandInfeasible: return "BandInfeasible";
        case ErrorKind::NotMonotone: return "NotMonotone";
        case ErrorKind::InvalidWarping: return "InvalidWarping";
        case ErrorKind::InvalidAlpha: return "InvalidAlpha";
        case ErrorKind::VersionMismatch: return "VersionMismatch";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace frtm
