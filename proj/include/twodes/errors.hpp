#pragma once

#include <stdexcept>
#include <string>

namespace twodes {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    /// Machine-readable category, e.g. "validation".
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Shapes or dimensions do not match.
class StructuralError : public Error {
public:
    explicit StructuralError(const std::string& what) : Error("structural", what) {}
};

/// An input violates a documented invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

class UnsupportedConfiguration : public Error {
public:
    explicit UnsupportedConfiguration(const std::string& what) : Error("unsupported", what) {}
};

/// Density matrix left the physical set during integration.
class IntegrationFailure : public Error {
public:
    IntegrationFailure(const std::string& what, double time_fs)
        : Error("integration", what + " at t=" + std::to_string(time_fs) + " fs"), time_(time_fs) {}

    double time_fs() const noexcept { return time_; }

private:
    double time_;
};

class NumericalSingularity : public Error {
public:
    explicit NumericalSingularity(const std::string& what) : Error("singular", what) {}
};

class CalibrationError : public Error {
public:
    explicit CalibrationError(const std::string& what) : Error("calibration", what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("parse", "line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace twodes
