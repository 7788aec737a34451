#pragma once

#include <stdexcept>
#include <string>

namespace oqrw {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operand shapes are incompatible (non-square trace, mismatched product, ...).
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// A walk definition violates its normalization or parameter constraints.
class DefinitionError : public Error {
public:
    explicit DefinitionError(const std::string& msg) : Error(msg) {}
};

// Lattice support would exceed the configured hard window cap.
class WindowOverflowError : public Error {
public:
    explicit WindowOverflowError(const std::string& msg) : Error(msg) {}
};

// An evolved state failed a numerical health check.
class CorruptedStateError : public Error {
public:
    explicit CorruptedStateError(const std::string& msg) : Error(msg) {}
};

// Every branch probability vanished; a trajectory cannot continue.
class DeadEndError : public Error {
public:
    explicit DeadEndError(const std::string& msg) : Error(msg) {}
};

// A source vertex cannot be dilated to a unitary.
class DilationError : public Error {
public:
    explicit DilationError(const std::string& msg) : Error(msg) {}
};

// An argument lies outside an operation's mathematical domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Malformed configuration or data file.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

} // namespace oqrw
