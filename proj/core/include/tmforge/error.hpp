#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tmforge {

// Values double as process exit codes for the CLI.
enum class ErrorKind : int {
  kUsage = 2,
  kIo = 3,
  kValidation = 4,
  kInternal = 5,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kInternal: return "internal";
  }
  return "internal";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

/// Malformed input text (bad UTF-8, broken XML, bad JSON line).
/// `offset` is a byte offset into the input, or npos when unknown.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t offset = std::string::npos)
      : ValidationError(what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace tmforge
