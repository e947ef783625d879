#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A mask leaves no position available (softmax or pooling over nothing).
class DegenerateMaskError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameter or incompatible configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad input values (label or token id out of range, etc).
class DataError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. backward() on a non-scalar.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A knowledge unit has no tokens left after cleaning.
class EmptyUnitError : public Error {
 public:
  explicit EmptyUnitError(const std::string& context)
      : Error("knowledge unit is empty after cleaning (" + context + ")") {}
};

}  // namespace asim
