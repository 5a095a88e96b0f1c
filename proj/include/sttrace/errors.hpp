#pragma once

#include <stdexcept>
#include <string>

namespace sttrace {

/// Base class for all solver errors; `kind()` is the stable machine-readable
/// class name the CLI prints next to its nonzero exit code.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

/// Invalid user-facing configuration (bad mesh size, missing exact solution, ...).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config_error", msg) {}
};

/// Surface reconstruction failed (empty surface, surface touching the box boundary, ...).
struct GeometryError : Error {
    explicit GeometryError(const std::string& msg) : Error("geometry_error", msg) {}
};

/// Linear solver could not reach the requested residual.
struct SolverError : Error {
    explicit SolverError(const std::string& msg) : Error("solver_failure", msg) {}
};

/// Point queries outside the background box.
struct OutOfDomainError : Error {
    explicit OutOfDomainError(const std::string& msg) : Error("out_of_domain", msg) {}
};

/// Function evaluation outside its domain of definition (e.g. radial velocity at 0).
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error("domain_error", msg) {}
};

/// File IO failures.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("io_error", msg) {}
};

/// Broken internal invariant; always a bug.
struct InternalError : Error {
    explicit InternalError(const std::string& msg) : Error("internal_error", msg) {}
};

}  // namespace sttrace
