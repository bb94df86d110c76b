#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lae {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A non-finite value reached a numeric routine.
class NumericError : public Error {
public:
  using Error::Error;
};

/// Invalid or missing configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// API misuse: stale caches, mismatched shapes, out-of-range steps.
class UsageError : public Error {
public:
  using Error::Error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// Structurally invalid file (bad magic, missing header, truncated payload).
class FormatError : public Error {
public:
  using Error::Error;
};

/// A malformed row in a text file. Carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Training produced a non-finite or exploding loss.
class DivergenceError : public Error {
public:
  using Error::Error;
};

/// An internal contract was violated after the fact (e.g. frozen weights drifted).
class InvariantError : public Error {
public:
  using Error::Error;
};

} // namespace lae
