#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fitmesh {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. Carries the byte offset of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error("syntax error at offset " + std::to_string(offset) + ": " + message),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Expression evaluation left the domain of a function (ln of a nonpositive
/// argument, division by zero, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Bad problem definition, config file, or CLI usage.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Mesh construction preconditions violated (interval count, parameters).
class MeshError : public Error {
public:
    using Error::Error;
};

/// Linear solver failure: singular pivot block or residual above tolerance.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Artifact file could not be written.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace fitmesh
