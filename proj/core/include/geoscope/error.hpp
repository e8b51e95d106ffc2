#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoscope {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or chart file. Carries the byte offset into the
/// offending text and, for chart files, the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset,
             std::vector<std::string> expected = {}, int line = 0)
      : Error(message), offset_(offset), line_(line), expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  int line() const noexcept { return line_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  int line_;
  std::vector<std::string> expected_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Shape or dimension mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A function evaluated outside its domain (log of a negative value,
/// division by zero, ...).
class DomainError : public Error {
 public:
  DomainError(const std::string& message, double value) : Error(message), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Numerical failure of an analysis: degenerate metric, no stabilization,
/// loss of skewness during transport.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoscope
