#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sersem {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Bad flags or configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// An input file does not match its wire format. Carries the 1-based line.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace sersem
