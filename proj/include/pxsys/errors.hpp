#pragma once

#include <stdexcept>
#include <string>

namespace pxsys {

// Failure categories; the CLI maps these onto process exit codes.
enum class ErrorKind {
    InvalidMesh,
    InvalidParam,
    MeshMismatch,
    ConjugateUndefined,
    CriticalUndefined,
    SingularEval,
    Diverged,
    Certification,
    BoxViolation,
    OracleFailure,
    BranchTruncated,
    Hypothesis,
    Config,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidMesh: return "invalid-mesh";
        case ErrorKind::InvalidParam: return "invalid-parameter";
        case ErrorKind::MeshMismatch: return "mesh-mismatch";
        case ErrorKind::ConjugateUndefined: return "conjugate-undefined";
        case ErrorKind::CriticalUndefined: return "critical-undefined";
        case ErrorKind::SingularEval: return "singular-evaluation";
        case ErrorKind::Diverged: return "diverged";
        case ErrorKind::Certification: return "certification-failure";
        case ErrorKind::BoxViolation: return "box-violation";
        case ErrorKind::OracleFailure: return "oracle-failure";
        case ErrorKind::BranchTruncated: return "branch-truncated";
        case ErrorKind::Hypothesis: return "hypothesis-failed";
        case ErrorKind::Config: return "config-error";
    }
    return "unknown";
}

}  // namespace pxsys
