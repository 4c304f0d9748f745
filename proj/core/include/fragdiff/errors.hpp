#pragma once

#include <stdexcept>
#include <string>

namespace fragdiff {

/// Broad failure category. The CLI maps each category onto its exit code.
enum class ErrorKind {
    config,     ///< invalid input, inadmissible coefficients, bad domain
    numerical,  ///< solver breakdown, non-convergence
    property    ///< a checked invariant was violated at run time
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Argument outside the mathematical domain of an operation (t <= 0, m <= -1, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Coefficients that fail the admissibility checks on a and b.
class AdmissibilityError : public Error {
public:
    explicit AdmissibilityError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class PropertyViolation : public Error {
public:
    explicit PropertyViolation(const std::string& what) : Error(ErrorKind::property, what) {}
};

}  // namespace fragdiff
