#pragma once

#include <stdexcept>
#include <string>

namespace c3 {

// Process exit codes shared by the CLI and tools.
enum class ExitCode : int {
    Ok = 0,
    Config = 2,
    ScorerUnavailable = 3,
    Io = 4,
    Internal = 5,
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor shape mismatch or unsupported dimensions (e.g. non power-of-two).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside its documented domain (cutoff ratio, amplification factor, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inverse transform of a spectrum whose imaginary residual is too large to discard.
class SymmetryError : public Error {
public:
    using Error::Error;
};

/// Malformed binary tensor file; message carries the byte offset of the defect.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Remote scorer could not be reached after the configured retries.
class ScorerUnavailableError : public Error {
public:
    using Error::Error;
};

/// Remote scorer answered, but not in the documented wire format.
class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace c3
