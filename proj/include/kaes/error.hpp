#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kaes {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input (TSV rows, config lines, CSV reports).
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Input that parses but violates a domain constraint.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Corrupt or truncated binary files.
class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace kaes
