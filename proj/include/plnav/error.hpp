#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plnav {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message, const std::string& source = {})
        : Error((source.empty() ? "" : source + ":") + "line " + std::to_string(line) + ": " + message),
          line_(line), message_(message) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::string message_;
};

/// A loaded or constructed value breaks a type invariant.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Rejection sampling ran out of attempts.
class SamplingExhaustedError : public Error {
public:
    using Error::Error;
};

/// Tensor, grid or vector dimensions disagree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation precondition.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Loss or gradient became NaN/inf.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace plnav
