#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atflow {

/// Bad arguments: incompatible grids, invalid parameters, bad configuration.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A time integrator produced non-finite values or a runaway energy.
class DivergedError : public std::runtime_error {
public:
    DivergedError(std::size_t step, const std::string& what)
        : std::runtime_error("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Iterative linear solver failed to reach its tolerance.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file contents; carries the byte offset where parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : std::runtime_error("parse error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// File is well-formed but of an unsupported kind.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace atflow
