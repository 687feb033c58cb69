#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace biqme {

// Base of every error thrown by the toolkit. `kind()` is a stable,
// machine-parsable class name used by the CLI error line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension_mismatch"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config_error"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  const char* kind() const noexcept override { return "parse_error"; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedVersion : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported_version"; }
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double gap)
      : Error(what + " (duality gap " + std::to_string(gap) + ")"), gap_(gap) {}
  const char* kind() const noexcept override { return "convergence_error"; }
  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

// Training and evaluation images share content (source hash overlap).
class DataOverlap : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "data_overlap"; }
};

}  // namespace biqme
