#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace predbs {

/// Base of every error thrown by the library. Callers that only need to
/// distinguish "our" failures from bugs catch this.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Arguments outside an operation's domain (bad config, p outside [-1, 1], ...).
class InputError : public Error {
  public:
    using Error::Error;
};

/// Inputs are individually valid but the requested quantity is undefined,
/// e.g. d+/d- when sigma * sqrt(tau) == 0.
class DegenerateInputError : public InputError {
  public:
    using InputError::InputError;
};

/// A market quote that no admissible p can explain.
class QuoteRejectedError : public Error {
  public:
    using Error::Error;
};

/// Malformed file contents. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// File parsed but too many rows failed validation to trust the result.
class DataQualityError : public Error {
  public:
    using Error::Error;
};

}  // namespace predbs
