#pragma once

#include <stdexcept>
#include <string>

namespace robstab {

enum class ErrorKind {
    Schema,
    Domain,
    NoConvergence,
    SingularJacobian,
    NearSingularAlgebraic,
    DimensionMismatch,
    NoCrossing,
    NoCoalescence,
    TrackingAmbiguity,
    CertificateViolated,
    Usage,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace robstab
