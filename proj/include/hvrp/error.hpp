#pragma once

#include <stdexcept>
#include <string>

namespace hvrp {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or instance specification.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message names the line and field.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A solution or instance violates a feasibility constraint.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Instance too large for an exact method.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Regression could not be fitted (singular or under-determined system).
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace hvrp
