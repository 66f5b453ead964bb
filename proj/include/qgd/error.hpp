#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qgd {

/// Base of every error thrown by the library. `exit_code` is what the CLI
/// reports when the error escapes a command.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code = 1)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Dimension mismatches, invalid sizes, malformed configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 2) {}
};

/// Non-finite values produced during evaluation.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::ptrdiff_t layer = -1)
      : Error(what, 3), layer_(layer) {}
  /// Index of the layer whose output went non-finite, or -1.
  std::ptrdiff_t layer() const noexcept { return layer_; }

 private:
  std::ptrdiff_t layer_;
};

/// Argument outside the mathematical domain of a transform (e.g. an objective
/// value at or below its declared lower bound).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what, 3) {}
};

/// Malformed text input. `line` is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + (line ? " (line " + std::to_string(line) + ")" : std::string{}), 2),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a content rule (e.g. a label >= K).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what, 2) {}
};

/// Malformed binary file.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(what, 2) {}
};

/// An action or feature that the model's action set does not provide.
class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& what) : Error(what, 2) {}
};

}  // namespace qgd
