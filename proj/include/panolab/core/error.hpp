#pragma once

#include <stdexcept>
#include <string>

namespace panolab {

/// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The inputs are well-formed but the requested geometry has no solution.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Cosine similarity against an all-zero vector.
class UndefinedSimilarity : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// Text input that failed to parse. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace panolab
