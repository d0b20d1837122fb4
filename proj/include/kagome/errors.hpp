#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kagome {

enum class ErrorKind {
  capacity,
  config,
  argument,
  state,
  contraction,
  singular_environment,
  sector,
  parse,
  validation,
  numerical,
};

std::string_view to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& m) : Error(ErrorKind::capacity, m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& m) : Error(ErrorKind::argument, m) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& m) : Error(ErrorKind::state, m) {}
};

class ContractionError : public Error {
 public:
  explicit ContractionError(const std::string& m) : Error(ErrorKind::contraction, m) {}
};

/// Raised when the effective normalization of a site is numerically zero.
class SingularEnvironmentError : public Error {
 public:
  explicit SingularEnvironmentError(const std::string& m)
      : Error(ErrorKind::singular_environment, m) {}
};

class SectorError : public Error {
 public:
  explicit SectorError(const std::string& m) : Error(ErrorKind::sector, m) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m) : Error(ErrorKind::parse, m) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m) : Error(ErrorKind::validation, m) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& m) : Error(ErrorKind::numerical, m) {}
};

}  // namespace kagome
