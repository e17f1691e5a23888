#pragma once

#include <stdexcept>
#include <string>

namespace kvflux {

// Base of every error raised by the library. The CLI maps the concrete type to
// an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (mesh files, CSV, config).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structurally well-formed input that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Boundary edges that do not chain into the expected loops.
class TopologyError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Bad input geometry for mesh generation.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Singular or near-singular systems, failed invariants of assembled operators.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kvflux
